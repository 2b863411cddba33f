#include "hanoi/geometry.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "hanoi/errors.hpp"

namespace hanoi {

namespace {

constexpr double kSqrt3Half = 0.86602540378443864676;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0 / 3.0)) {
    std::ostringstream msg;
    msg << "alpha must lie in the open interval (0, 1/3), got " << alpha;
    throw InvalidParameter(msg.str());
  }
}

std::size_t pow3(int k) {
  std::size_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

// The two symbols of {1,2,3} other than i, ascending.
std::array<std::uint8_t, 2> others(int i) {
  switch (i) {
    case 1: return {2, 3};
    case 2: return {1, 3};
    default: return {1, 2};
  }
}

}  // namespace

Params::Params(double alpha) : alpha_(alpha) { require_alpha(alpha); }

Word::Word(std::vector<std::uint8_t> symbols) : symbols_(std::move(symbols)) {
  for (auto s : symbols_) {
    if (s < 1 || s > 3) throw InvalidParameter("word symbols must be 1, 2 or 3");
  }
}

Word Word::parse(std::string_view text) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(text.size());
  for (char ch : text) {
    if (ch < '1' || ch > '3') {
      throw InvalidParameter("word symbols must be 1, 2 or 3, got '" + std::string(1, ch) + "'");
    }
    symbols.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return Word(std::move(symbols));
}

Word Word::appended(std::uint8_t symbol) const {
  auto s = symbols_;
  s.push_back(symbol);
  return Word(std::move(s));
}

std::size_t Word::rank() const {
  std::size_t r = 0;
  for (auto s : symbols_) r = 3 * r + (s - 1u);
  return r;
}

Word Word::from_rank(std::size_t rank, std::size_t length) {
  std::vector<std::uint8_t> s(length);
  for (std::size_t i = length; i-- > 0;) {
    s[i] = static_cast<std::uint8_t>(rank % 3 + 1);
    rank /= 3;
  }
  return Word(std::move(s));
}

std::string Word::str() const {
  std::string out;
  out.reserve(symbols_.size());
  for (auto s : symbols_) out.push_back(static_cast<char>('0' + s));
  return out;
}

Point corner(int i) {
  switch (i) {
    case 1: return {0.0, 0.0};
    case 2: return {0.5, kSqrt3Half};
    case 3: return {1.0, 0.0};
    default: throw InvalidParameter("corner index must be 1, 2 or 3");
  }
}

Point contract(const Word& w, Point x, double alpha) {
  const double r = 0.5 * (1.0 - alpha);
  // Innermost map first: G_{w_1} o ... o G_{w_n}.
  for (std::size_t i = w.size(); i-- > 0;) {
    const Point p = corner(w[i]);
    x = {r * (x.x - p.x) + p.x, r * (x.y - p.y) + p.y};
  }
  return x;
}

double hausdorff_dimension(double alpha) {
  require_alpha(alpha);
  return std::log(3.0) / (std::log(2.0) - std::log1p(-alpha));
}

double holder_exponent(double alpha) {
  require_alpha(alpha);
  return (std::log(3.0) - std::log(5.0)) / (2.0 * (std::log1p(-alpha) - std::log(2.0)));
}

double segment_length(double alpha, int k) {
  if (k <= 0) return 0.0;
  return alpha * std::pow(0.5 * (1.0 - alpha), k - 1);
}

LevelSets build_level_sets(const Params& params, int n) {
  if (n < 0) throw InvalidParameter("level must be >= 0");
  const double alpha = params.alpha();
  LevelSets sets;

  const std::size_t cells = pow3(n);
  sets.vertices.reserve(3 * cells);
  for (std::size_t c = 0; c < cells; ++c) {
    Word w = Word::from_rank(c, static_cast<std::size_t>(n));
    for (int i = 0; i < 3; ++i) {
      sets.vertices.push_back({w, i, contract(w, corner(i + 1), alpha)});
    }
  }

  // A segment created at level k sits between corners of two k-cells; at level n those
  // corners are reached by padding the k-cell word with the corner symbol.
  const auto finest_address = [n](Word w, std::uint8_t c) {
    while (static_cast<int>(w.size()) < n) w = w.appended(c);
    return w;
  };
  const double r = params.ratio();
  for (int k = 1; k <= n; ++k) {
    const std::size_t parents = pow3(k - 1);
    const double scale = std::pow(r, k - 1);
    for (std::size_t pr = 0; pr < parents; ++pr) {
      Word parent = Word::from_rank(pr, static_cast<std::size_t>(k - 1));
      for (int i = 1; i <= 3; ++i) {
        const auto [j, m] = others(i);
        SegmentSpec seg;
        seg.level = k;
        seg.parent = parent;
        seg.index = i;
        const Word wa = parent.appended(j);
        const Word wb = parent.appended(m);
        seg.ends[0] = {finest_address(wa, m), m - 1, contract(wa, corner(m), alpha)};
        seg.ends[1] = {finest_address(wb, j), j - 1, contract(wb, corner(j), alpha)};
        // Unit-level chord G_m(p_j) - G_j(p_m), scaled by the parent cell's ratio.
        const Point u = contract(Word({m}), corner(j), alpha);
        const Point v = contract(Word({j}), corner(m), alpha);
        seg.length = scale * std::hypot(u.x - v.x, u.y - v.y);
        sets.segments.push_back(std::move(seg));
      }
    }
  }
  return sets;
}

Mesh::Mesh(Params params, int level, int subdiv, std::vector<Vertex> vertices,
           std::vector<DiscreteEdge> edges, std::vector<Segment> segments)
    : params_(params),
      level_(level),
      subdiv_(subdiv),
      corner_count_(3 * pow3(level)),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      segments_(std::move(segments)) {}

std::array<std::size_t, 3> Mesh::boundary() const {
  const std::size_t last = pow3(level_) - 1;
  // p_i is corner i of the cell addressed by i^n.
  return {corner_id(0, 0), corner_id(last / 2, 1), corner_id(last, 2)};
}

bool Mesh::is_connected() const {
  const std::size_t n = vertices_.size();
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };
  for (const auto& e : edges_) unite(e.a, e.b);
  for (const auto& s : segments_) {
    std::size_t prev = s.a;
    for (auto id : s.interior) {
      unite(prev, id);
      prev = id;
    }
    unite(prev, s.b);
  }
  const std::size_t root = find(0);
  for (std::size_t i = 1; i < n; ++i) {
    if (find(i) != root) return false;
  }
  return true;
}

std::size_t mesh_node_count(int n, int subdiv) {
  const std::size_t corners = 3 * pow3(n);
  return corners + static_cast<std::size_t>(subdiv - 1) * (corners - 3) / 2;
}

Mesh build_mesh(const Params& params, int n, int subdiv) {
  if (n < 0) throw InvalidParameter("level must be >= 0");
  if (subdiv < 1) throw InvalidParameter("subdiv (M) must be >= 1");

  LevelSets sets = build_level_sets(params, n);

  std::vector<Vertex> vertices;
  vertices.reserve(mesh_node_count(n, subdiv));
  for (std::size_t i = 0; i < sets.vertices.size(); ++i) {
    vertices.push_back({i, sets.vertices[i].pos, VertexKind::CellCorner, n});
  }

  std::vector<DiscreteEdge> edges;
  edges.reserve(sets.vertices.size());
  const std::size_t cells = sets.vertices.size() / 3;
  for (std::size_t c = 0; c < cells; ++c) {
    const Word& w = sets.vertices[3 * c].word;
    edges.push_back({3 * c, 3 * c + 1, w});
    edges.push_back({3 * c, 3 * c + 2, w});
    edges.push_back({3 * c + 1, 3 * c + 2, w});
  }

  std::vector<Segment> segments;
  segments.reserve(sets.segments.size());
  for (const auto& spec : sets.segments) {
    Segment seg;
    seg.level = spec.level;
    seg.a = 3 * spec.ends[0].word.rank() + static_cast<std::size_t>(spec.ends[0].corner);
    seg.b = 3 * spec.ends[1].word.rank() + static_cast<std::size_t>(spec.ends[1].corner);
    seg.length = spec.length;
    const Point pa = vertices[seg.a].pos;
    const Point pb = vertices[seg.b].pos;
    for (int s = 1; s < subdiv; ++s) {
      const double t = static_cast<double>(s) / subdiv;
      const std::size_t id = vertices.size();
      vertices.push_back({id, {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)},
                          VertexKind::SegmentInterior, spec.level});
      seg.interior.push_back(id);
    }
    segments.push_back(std::move(seg));
  }

  return Mesh(params, n, subdiv, std::move(vertices), std::move(edges), std::move(segments));
}

}  // namespace hanoi
