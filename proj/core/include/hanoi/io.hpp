#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "hanoi/forms.hpp"
#include "hanoi/geometry.hpp"
#include "hanoi/measure.hpp"
#include "hanoi/spectral.hpp"

namespace hanoi::io {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

nlohmann::json mesh_json(const Mesh& mesh);

/// Off-diagonal stiffness entries with row < col as "row,col,conductance".
void write_form_csv(std::ostream& out, const EnergyForm& form);
nlohmann::json form_header(const Mesh& mesh, const RenormFactors& factors);

/// "node,mass".
void write_mass_csv(std::ostream& out, const MassVector& mass);
nlohmann::json mass_header(const MeasureParams& params, const MassVector& mass);

/// "index,eigenvalue".
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);
/// "x,N" at every distinct eigenvalue.
void write_counting_csv(std::ostream& out, const Spectrum& spectrum);
/// "log_x,log_N" at every distinct positive eigenvalue.
void write_plot_csv(std::ostream& out, const Spectrum& spectrum);

nlohmann::json fit_json(const FitReport& fit, const WindowPolicy& window, const WeylBracketReport* bracket);

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

std::vector<double> read_spectrum_csv(std::istream& in);
std::vector<std::pair<double, std::size_t>> read_counting_csv(std::istream& in);
std::vector<Triplet> read_form_csv(std::istream& in);
std::vector<double> read_mass_csv(std::istream& in);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
std::string read_text(const std::filesystem::path& path);

}  // namespace hanoi::io
