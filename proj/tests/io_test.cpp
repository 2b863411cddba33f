#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "hanoi/errors.hpp"
#include "hanoi/forms.hpp"
#include "hanoi/io.hpp"
#include "hanoi/measure.hpp"
#include "hanoi/spectral.hpp"

using hanoi::Params;

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> exp_dist(-300.0, 300.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::pow(10.0, exp_dist(rng)) * (i % 2 ? -1 : 1);
    EXPECT_EQ(std::stod(hanoi::io::format_double(x)), x);
  }
  EXPECT_EQ(hanoi::io::format_double(0.5), "0.5");
  EXPECT_EQ(hanoi::io::format_double(0.0), "0");
}

TEST(SpectrumCsv, RoundTrip) {
  const auto mesh = hanoi::build_mesh(Params(0.25), 3, 2);
  const auto form = hanoi::assemble_energy(mesh, hanoi::renorm_factors(mesh.params(), 3));
  const auto mass = hanoi::assemble_mass(mesh, hanoi::MeasureParams(0.25, 0.3));
  const auto spec = hanoi::solve_spectrum(hanoi::EigenProblem(form, mass, hanoi::Boundary::Neumann, {0.25, 0.3, 3, 2}),
                                          mesh.node_count());
  std::stringstream ss;
  hanoi::io::write_spectrum_csv(ss, spec);
  const auto back = hanoi::io::read_spectrum_csv(ss);
  ASSERT_EQ(back.size(), spec.eigenvalues.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_LE(std::abs(back[i] - spec.eigenvalues[i]), 1e-12 * std::max(1.0, std::abs(spec.eigenvalues[i])));
    EXPECT_EQ(back[i], spec.eigenvalues[i]);
  }

  std::stringstream cs;
  hanoi::io::write_counting_csv(cs, spec);
  const auto samples = hanoi::io::read_counting_csv(cs);
  EXPECT_EQ(samples, hanoi::counting_samples(spec));
}

TEST(FormCsv, RoundTripRebuildsStiffness) {
  const auto mesh = hanoi::build_mesh(Params(0.3), 3, 3);
  const auto form = hanoi::assemble_energy(mesh, hanoi::renorm_factors(mesh.params(), 3));
  std::stringstream ss;
  hanoi::io::write_form_csv(ss, form);
  const auto triplets = hanoi::io::read_form_csv(ss);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.node_count()),
                                            static_cast<Eigen::Index>(mesh.node_count()));
  for (const auto& t : triplets) {
    ASSERT_LT(t.row, t.col);
    const auto i = static_cast<Eigen::Index>(t.row), j = static_cast<Eigen::Index>(t.col);
    k(i, i) += t.value;
    k(j, j) += t.value;
    k(i, j) -= t.value;
    k(j, i) -= t.value;
  }
  const Eigen::MatrixXd ref = Eigen::MatrixXd(form.stiffness());
  EXPECT_LE((k - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff());
  EXPECT_EQ(triplets.size(), mesh.discrete_edges().size() + mesh.segments().size() * 3);
}

TEST(MassCsv, RoundTrip) {
  const auto mesh = hanoi::build_mesh(Params(0.1), 4, 2);
  const auto mass = hanoi::assemble_mass(mesh, hanoi::MeasureParams(0.1, 0.2));
  std::stringstream ss;
  hanoi::io::write_mass_csv(ss, mass);
  EXPECT_EQ(hanoi::io::read_mass_csv(ss), mass.masses);
  const auto header = hanoi::io::mass_header(hanoi::MeasureParams(0.1, 0.2), mass);
  EXPECT_EQ(header.at("discrete_total").get<double>(), mass.discrete_total);
  EXPECT_EQ(header.at("beta").get<double>(), 0.2);
}

TEST(Headers, FormHeaderLists) {
  const auto mesh = hanoi::build_mesh(Params(0.25), 2, 2);
  const auto f = hanoi::renorm_factors(mesh.params(), 2);
  const auto h = hanoi::io::form_header(mesh, f);
  EXPECT_EQ(h.at("rho_d").size(), 3u);
  EXPECT_EQ(h.at("rho_c").size(), 2u);
  EXPECT_EQ(h.at("rho_d")[0].get<double>(), 1.0);
  EXPECT_EQ(h.at("rho_c")[1].get<double>(), f.rho_c(2));
}

TEST(MeshJson, FieldsAndRoundTrip) {
  const auto mesh = hanoi::build_mesh(Params(0.25), 2, 3);
  const auto j = hanoi::io::mesh_json(mesh);
  const auto back = nlohmann::json::parse(j.dump());
  EXPECT_EQ(back, j);
  ASSERT_EQ(back.at("vertices").size(), mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const auto& v = back.at("vertices")[i];
    EXPECT_EQ(v.at("id").get<std::size_t>(), i);
    EXPECT_EQ(v.at("x").get<double>(), mesh.vertices()[i].pos.x);
    EXPECT_EQ(v.at("y").get<double>(), mesh.vertices()[i].pos.y);
  }
  EXPECT_EQ(back.at("segments")[0].at("interior_ids").size(), 2u);
  EXPECT_EQ(back.at("discrete_edges").size(), mesh.discrete_edges().size());
}

TEST(FitJson, Fields) {
  hanoi::FitReport fit;
  fit.slope = 0.7;
  fit.d_s = 1.4;
  fit.c1 = 0.1;
  fit.c2 = 0.3;
  fit.points = 120;
  const auto j = hanoi::io::fit_json(fit, {}, nullptr);
  EXPECT_TRUE(j.at("max_gap_NN_ND").is_null());
  EXPECT_EQ(j.at("window").at("drop_low").get<std::size_t>(), 20u);
  hanoi::WeylBracketReport r;
  r.max_gap = 2;
  const auto k = hanoi::io::fit_json(fit, {}, &r);
  EXPECT_EQ(k.at("max_gap_NN_ND").get<long long>(), 2);
  EXPECT_EQ(k.at("d_s").get<double>(), 1.4);
}

TEST(Readers, RejectMalformedInput) {
  std::stringstream bad_header("idx,value\n0,1\n");
  EXPECT_THROW(hanoi::io::read_spectrum_csv(bad_header), hanoi::IoError);
  std::stringstream bad_number("index,eigenvalue\n0,abc\n");
  EXPECT_THROW(hanoi::io::read_spectrum_csv(bad_number), hanoi::IoError);
  std::stringstream bad_order("index,eigenvalue\n1,0.5\n");
  EXPECT_THROW(hanoi::io::read_spectrum_csv(bad_order), hanoi::IoError);
  std::stringstream bad_row("row,col,conductance\n0,1\n");
  EXPECT_THROW(hanoi::io::read_form_csv(bad_row), hanoi::IoError);
}

TEST(Files, WriteReadText) {
  const auto dir = std::filesystem::temp_directory_path() / "hanoi_io_test";
  std::filesystem::create_directories(dir);
  hanoi::io::write_text(dir / "a.txt", "hello\n");
  EXPECT_EQ(hanoi::io::read_text(dir / "a.txt"), "hello\n");
  EXPECT_THROW(hanoi::io::read_text(dir / "missing.txt"), hanoi::IoError);
  EXPECT_THROW(hanoi::io::write_text(dir / "no_such_dir" / "x.txt", "x"), hanoi::IoError);
  std::filesystem::remove_all(dir);
}
