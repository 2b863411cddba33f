#include "hanoi/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "hanoi/errors.hpp"

namespace hanoi::io {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buf.data(), end);
}

nlohmann::json mesh_json(const Mesh& mesh) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const Vertex& v : mesh.vertices()) {
    vertices.push_back({{"id", v.id},
                        {"x", v.pos.x},
                        {"y", v.pos.y},
                        {"kind", v.kind == VertexKind::CellCorner ? "corner" : "segment"},
                        {"level", v.level}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const DiscreteEdge& e : mesh.discrete_edges()) {
    edges.push_back({{"a", e.a}, {"b", e.b}, {"word", e.word.str()}});
  }
  nlohmann::json segments = nlohmann::json::array();
  for (const Segment& s : mesh.segments()) {
    segments.push_back({{"level", s.level}, {"a", s.a}, {"b", s.b}, {"interior_ids", s.interior}});
  }
  return {{"alpha", mesh.params().alpha()},
          {"level", mesh.level()},
          {"subdiv", mesh.subdiv()},
          {"vertices", std::move(vertices)},
          {"discrete_edges", std::move(edges)},
          {"segments", std::move(segments)}};
}

void write_form_csv(std::ostream& out, const EnergyForm& form) {
  std::vector<Triplet> entries;
  const SparseMatrix& k = form.stiffness();
  for (int col = 0; col < k.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
      if (it.row() < col && it.value() != 0.0) {
        entries.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(col), -it.value()});
      }
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return std::pair(a.row, a.col) < std::pair(b.row, b.col); });
  out << "row,col,conductance\n";
  for (const Triplet& t : entries) out << t.row << ',' << t.col << ',' << format_double(t.value) << '\n';
}

nlohmann::json form_header(const Mesh& mesh, const RenormFactors& factors) {
  std::vector<double> rho_d, rho_c;
  for (int k = 0; k <= mesh.level(); ++k) rho_d.push_back(factors.rho_d(k));
  for (int k = 1; k <= mesh.level(); ++k) rho_c.push_back(factors.rho_c(k));
  return {{"alpha", mesh.params().alpha()},
          {"level", mesh.level()},
          {"subdiv", mesh.subdiv()},
          {"rho_d", rho_d},
          {"rho_c", rho_c}};
}

void write_mass_csv(std::ostream& out, const MassVector& mass) {
  out << "node,mass\n";
  for (std::size_t i = 0; i < mass.masses.size(); ++i) out << i << ',' << format_double(mass.masses[i]) << '\n';
}

nlohmann::json mass_header(const MeasureParams& params, const MassVector& mass) {
  return {{"alpha", params.alpha()},
          {"beta", params.beta()},
          {"normalizer", continuous_normalizer(params)},
          {"discrete_total", mass.discrete_total},
          {"continuous_total", mass.continuous_total}};
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "index,eigenvalue\n";
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
    out << i << ',' << format_double(spectrum.eigenvalues[i]) << '\n';
  }
}

void write_counting_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "x,N\n";
  for (const auto& [x, n] : counting_samples(spectrum)) out << format_double(x) << ',' << n << '\n';
}

void write_plot_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "log_x,log_N\n";
  for (const auto& [x, n] : counting_samples(spectrum)) {
    if (x > 0.0) out << format_double(std::log(x)) << ',' << format_double(std::log(static_cast<double>(n))) << '\n';
  }
}

nlohmann::json fit_json(const FitReport& fit, const WindowPolicy& window, const WeylBracketReport* bracket) {
  nlohmann::json out = {{"slope", fit.slope},
                        {"d_s", fit.d_s},
                        {"window",
                         {{"x_lo", fit.x_lo},
                          {"x_hi", fit.x_hi},
                          {"points", fit.points},
                          {"drop_low", window.drop_low},
                          {"high_fraction", window.high_fraction}}},
                        {"c1", fit.c1},
                        {"c2", fit.c2},
                        {"target_slope", weyl_exponent()},
                        {"max_gap_NN_ND", nullptr}};
  if (bracket != nullptr) {
    out["max_gap_NN_ND"] = bracket->max_gap;
    out["min_gap_NN_ND"] = bracket->min_gap;
    out["bracket_x_max"] = bracket->x_max;
    out["interlacing_ok"] = bracket->gap_within_boundary_rank;
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

template <typename T>
T parse_number(const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw IoError("malformed number '" + text + "'");
  return value;
}

// Rows of a CSV with a fixed header and `columns` fields each.
std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header, std::size_t columns) {
  std::string line;
  if (!std::getline(in, line) || line != header) throw IoError("expected CSV header '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != columns) throw IoError("malformed CSV row '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<double> read_spectrum_csv(std::istream& in) {
  std::vector<double> out;
  for (const auto& row : read_rows(in, "index,eigenvalue", 2)) {
    if (parse_number<std::size_t>(row[0]) != out.size()) throw IoError("spectrum indices out of order");
    out.push_back(parse_number<double>(row[1]));
  }
  return out;
}

std::vector<std::pair<double, std::size_t>> read_counting_csv(std::istream& in) {
  std::vector<std::pair<double, std::size_t>> out;
  for (const auto& row : read_rows(in, "x,N", 2)) {
    out.emplace_back(parse_number<double>(row[0]), parse_number<std::size_t>(row[1]));
  }
  return out;
}

std::vector<Triplet> read_form_csv(std::istream& in) {
  std::vector<Triplet> out;
  for (const auto& row : read_rows(in, "row,col,conductance", 3)) {
    out.push_back({parse_number<std::size_t>(row[0]), parse_number<std::size_t>(row[1]), parse_number<double>(row[2])});
  }
  return out;
}

std::vector<double> read_mass_csv(std::istream& in) {
  std::vector<double> out;
  for (const auto& row : read_rows(in, "node,mass", 2)) {
    if (parse_number<std::size_t>(row[0]) != out.size()) throw IoError("mass node ids out of order");
    out.push_back(parse_number<double>(row[1]));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hanoi::io
