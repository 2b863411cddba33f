#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hanoi {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Attractor parameter alpha, restricted to the open interval (0, 1/3).
class Params {
 public:
  explicit Params(double alpha);

  double alpha() const { return alpha_; }
  /// Contraction ratio (1 - alpha) / 2 of the three cell maps.
  double ratio() const { return 0.5 * (1.0 - alpha_); }

  friend bool operator==(const Params&, const Params&) = default;

 private:
  double alpha_;
};

/// A finite word over the alphabet {1, 2, 3}. The empty word maps to the identity.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint8_t> symbols);
  /// Parses e.g. "132"; rejects characters outside '1'..'3'.
  static Word parse(std::string_view text);

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<std::uint8_t>& symbols() const { return symbols_; }

  Word appended(std::uint8_t symbol) const;
  /// Base-3 rank among words of the same length (lexicographic order).
  std::size_t rank() const;
  static Word from_rank(std::size_t rank, std::size_t length);
  std::string str() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<std::uint8_t> symbols_;
};

/// Outer triangle corners p_1, p_2, p_3 (index 1..3).
Point corner(int i);

/// G_w(x) = G_{w_1} o ... o G_{w_n}(x) with G_i(x) = r (x - p_i) + p_i.
Point contract(const Word& w, Point x, double alpha);

/// Hausdorff dimension ln 3 / (ln 2 - ln(1 - alpha)).
double hausdorff_dimension(double alpha);

/// Hölder exponent (ln 3 - ln 5) / (2 (ln(1 - alpha) - ln 2)) of finite-energy functions.
double holder_exponent(double alpha);

/// Length of a level-k connecting segment, alpha ((1 - alpha)/2)^(k-1); zero for k = 0.
double segment_length(double alpha, int k);

/// Corner i (0-based) of the n-cell addressed by `word`.
struct CellVertex {
  Word word;
  int corner = 0;
  Point pos;
};

/// A connecting segment e_i of the (k-1)-cell `parent`, so its level is k = |parent| + 1.
/// It joins G_{parent j}(p_m) and G_{parent m}(p_j) where {i, j, m} = {1, 2, 3}.
struct SegmentSpec {
  int level = 0;
  Word parent;
  int index = 0;  // i in 1..3
  std::array<CellVertex, 2> ends;
  double length = 0.0;
};

struct LevelSets {
  std::vector<CellVertex> vertices;  // W_n
  std::vector<SegmentSpec> segments;  // components of J_n
};

/// W_n and the components of J_n in deterministic order: vertices by (word, corner),
/// segments by (level, parent word, index).
LevelSets build_level_sets(const Params& params, int n);

enum class VertexKind { CellCorner, SegmentInterior };

struct Vertex {
  std::size_t id = 0;
  Point pos;
  VertexKind kind = VertexKind::CellCorner;
  /// n for cell corners, segment level k for segment-interior points.
  int level = 0;
};

struct DiscreteEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  Word word;
};

struct Segment {
  int level = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;
  /// M - 1 interior nodes ordered from a to b (parameter t = s / M).
  std::vector<std::size_t> interior;
};

/// Finite graph realizing V_n: cell corners joined by n-neighbor edges, plus every
/// segment of J_n cut into M pieces uniform in its parameter.
class Mesh {
 public:
  Mesh(Params params, int level, int subdiv, std::vector<Vertex> vertices,
       std::vector<DiscreteEdge> edges, std::vector<Segment> segments);

  const Params& params() const { return params_; }
  int level() const { return level_; }
  int subdiv() const { return subdiv_; }
  std::size_t node_count() const { return vertices_.size(); }
  std::size_t corner_count() const { return corner_count_; }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<DiscreteEdge>& discrete_edges() const { return edges_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Node id of corner `c` (0-based) of the n-cell with base-3 rank `cell`.
  std::size_t corner_id(std::size_t cell, int c) const { return 3 * cell + static_cast<std::size_t>(c); }
  /// Ids of p_1, p_2, p_3.
  std::array<std::size_t, 3> boundary() const;
  bool is_connected() const;

 private:
  Params params_;
  int level_;
  int subdiv_;
  std::size_t corner_count_;
  std::vector<Vertex> vertices_;
  std::vector<DiscreteEdge> edges_;
  std::vector<Segment> segments_;
};

/// Node count 3^{n+1} + (M - 1)(3^{n+1} - 3)/2 without building the mesh.
std::size_t mesh_node_count(int n, int subdiv);

Mesh build_mesh(const Params& params, int n, int subdiv);

}  // namespace hanoi
