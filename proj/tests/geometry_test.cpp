#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hanoi/errors.hpp"
#include "hanoi/geometry.hpp"
#include "hanoi/io.hpp"
#include "oracles.hpp"

using hanoi::Params;
using hanoi::Point;
using hanoi::Word;

namespace {

std::size_t pow3(int n) {
  std::size_t p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return p;
}

void expect_near(Point a, Point b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
}

}  // namespace

TEST(Params, AcceptsOpenInterval) {
  EXPECT_NO_THROW(Params(0.25));
  EXPECT_NO_THROW(Params(1e-9));
  EXPECT_NO_THROW(Params(1.0 / 3.0 - 1e-9));
  EXPECT_DOUBLE_EQ(Params(0.25).ratio(), 0.375);
}

TEST(Params, RejectsEndpointsAndNonFinite) {
  EXPECT_THROW(Params(0.0), hanoi::InvalidParameter);
  EXPECT_THROW(Params(1.0 / 3.0), hanoi::InvalidParameter);
  EXPECT_THROW(Params(-0.1), hanoi::InvalidParameter);
  EXPECT_THROW(Params(0.5), hanoi::InvalidParameter);
  EXPECT_THROW(Params(std::numeric_limits<double>::quiet_NaN()), hanoi::InvalidParameter);
}

TEST(Word, ParseRankRoundTrip) {
  const Word w = Word::parse("132");
  EXPECT_EQ(w.size(), 3u);
  EXPECT_EQ(w.str(), "132");
  EXPECT_EQ(w.rank(), 0u * 9 + 2u * 3 + 1u);
  for (std::size_t r = 0; r < 27; ++r) EXPECT_EQ(Word::from_rank(r, 3).rank(), r);
  EXPECT_EQ(Word::parse("").size(), 0u);
  EXPECT_THROW(Word::parse("14"), hanoi::InvalidParameter);
  EXPECT_THROW(Word::parse("a"), hanoi::InvalidParameter);
}

TEST(Contract, EmptyWordIsIdentity) { expect_near(hanoi::contract(Word{}, {0.3, 0.7}, 0.25), {0.3, 0.7}, 0.0); }

TEST(Contract, FixedPointsAndSpotValue) {
  for (int i = 1; i <= 3; ++i) {
    const Word w = Word::parse(std::to_string(i));
    expect_near(hanoi::contract(w, hanoi::corner(i), 0.25), hanoi::corner(i), 1e-15);
  }
  expect_near(hanoi::contract(Word::parse("1"), hanoi::corner(3), 0.25), {0.375, 0.0}, 1e-15);
}

TEST(Contract, ComposesOuterSymbolLast) {
  const double a = 0.2;
  const double r = 0.5 * (1.0 - a);
  const Point x{0.31, 0.17};
  auto g = [&](int i, Point p) {
    const Point c = hanoi::corner(i);
    return Point{c.x + r * (p.x - c.x), c.y + r * (p.y - c.y)};
  };
  expect_near(hanoi::contract(Word::parse("23"), x, a), g(2, g(3, x)), 1e-15);
  expect_near(hanoi::contract(Word::parse("312"), x, a), g(3, g(1, g(2, x))), 1e-15);
}

TEST(Dimensions, HausdorffSpotValuesAndLimits) {
  EXPECT_NEAR(hanoi::hausdorff_dimension(0.25), std::log(3.0) / std::log(2.0 / 0.75), 1e-15);
  EXPECT_NEAR(hanoi::hausdorff_dimension(0.25), 1.120090, 1e-5);
  EXPECT_NEAR(hanoi::hausdorff_dimension(1e-12), std::log(3.0) / std::log(2.0), 1e-9);
  EXPECT_NEAR(hanoi::hausdorff_dimension(1.0 / 3.0 - 1e-12), 1.0, 1e-9);
  EXPECT_THROW(hanoi::hausdorff_dimension(0.4), hanoi::InvalidParameter);
}

TEST(Dimensions, HolderExponent) {
  EXPECT_NEAR(hanoi::holder_exponent(0.25), std::log(5.0 / 3.0) / (2.0 * std::log(2.0 / 0.75)), 1e-15);
  EXPECT_NEAR(hanoi::holder_exponent(0.25), 0.260396, 1e-5);
  EXPECT_NEAR(hanoi::holder_exponent(1e-12), (std::log(5.0) - std::log(3.0)) / (2.0 * std::log(2.0)), 1e-9);
  for (double a = 0.01; a < 1.0 / 3.0; a += 0.01) {
    EXPECT_GT(hanoi::holder_exponent(a), 0.0);
    EXPECT_LT(hanoi::holder_exponent(a), 0.5);
  }
}

TEST(LevelSets, Counts) {
  const Params p(0.25);
  auto s0 = hanoi::build_level_sets(p, 0);
  EXPECT_EQ(s0.vertices.size(), 3u);
  EXPECT_EQ(s0.segments.size(), 0u);
  auto s1 = hanoi::build_level_sets(p, 1);
  EXPECT_EQ(s1.vertices.size(), 9u);
  ASSERT_EQ(s1.segments.size(), 3u);
  for (const auto& s : s1.segments) EXPECT_NEAR(s.length, 0.25, 1e-15);
  auto s3 = hanoi::build_level_sets(p, 3);
  EXPECT_EQ(s3.vertices.size(), 81u);
  EXPECT_EQ(s3.segments.size(), 39u);
  std::size_t per_level[4] = {0, 0, 0, 0};
  for (const auto& s : s3.segments) per_level[s.level]++;
  EXPECT_EQ(per_level[1], 3u);
  EXPECT_EQ(per_level[2], 9u);
  EXPECT_EQ(per_level[3], 27u);
}

TEST(LevelSets, VerticesMatchShrunkTriangles) {
  for (double a : {0.1, 0.25, 0.3}) {
    for (int n = 0; n <= 5; ++n) {
      const auto sets = hanoi::build_level_sets(Params(a), n);
      const auto tri = oracle::cells(a, n);
      ASSERT_EQ(sets.vertices.size(), 3 * tri.size());
      for (std::size_t c = 0; c < tri.size(); ++c) {
        for (int i = 0; i < 3; ++i) expect_near(sets.vertices[3 * c + i].pos, tri[c][i], 1e-14);
      }
    }
  }
}

TEST(LevelSets, SegmentLengthsAndEndpoints) {
  for (double a : {0.1, 0.25, 0.3}) {
    const int n = 6;
    const auto sets = hanoi::build_level_sets(Params(a), n);
    for (const auto& s : sets.segments) {
      const double dk = oracle::d(a, s.level);
      EXPECT_NEAR(s.length / dk, 1.0, 1e-14);
      const Point p = s.ends[0].pos;
      const Point q = s.ends[1].pos;
      EXPECT_NEAR(std::hypot(p.x - q.x, p.y - q.y) / dk, 1.0, 1e-12);
      // The two ends lie in different level-k cells.
      EXPECT_NE(s.ends[0].word.symbols()[static_cast<std::size_t>(s.level) - 1],
                s.ends[1].word.symbols()[static_cast<std::size_t>(s.level) - 1]);
    }
  }
}

TEST(Mesh, NodeCounts) {
  const Params p(0.25);
  auto m11 = hanoi::build_mesh(p, 1, 1);
  EXPECT_EQ(m11.node_count(), 9u);
  EXPECT_EQ(m11.discrete_edges().size(), 9u);
  EXPECT_EQ(m11.segments().size(), 3u);
  EXPECT_EQ(hanoi::build_mesh(p, 1, 4).node_count(), 18u);
  EXPECT_EQ(hanoi::build_mesh(p, 2, 2).node_count(), 39u);
  for (int n = 0; n <= 6; ++n) {
    for (int m = 1; m <= 4; ++m) {
      const auto mesh = hanoi::build_mesh(p, n, m);
      EXPECT_EQ(mesh.node_count(), hanoi::mesh_node_count(n, m));
      EXPECT_EQ(mesh.corner_count(), pow3(n + 1));
      EXPECT_EQ(mesh.segments().size(), (pow3(n + 1) - 3) / 2);
      EXPECT_EQ(mesh.discrete_edges().size(), 3 * pow3(n));
      EXPECT_EQ(mesh.node_count(), pow3(n + 1) + static_cast<std::size_t>(m - 1) * (pow3(n + 1) - 3) / 2);
    }
  }
}

TEST(Mesh, RejectsBadArguments) {
  EXPECT_THROW(hanoi::build_mesh(Params(0.25), 2, 0), hanoi::InvalidParameter);
  EXPECT_THROW(hanoi::build_mesh(Params(0.25), -1, 1), hanoi::InvalidParameter);
}

TEST(Mesh, IdsContiguousAndKinds) {
  const auto mesh = hanoi::build_mesh(Params(0.2), 3, 3);
  std::set<std::size_t> ids;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const auto& v = mesh.vertices()[i];
    EXPECT_EQ(v.id, i);
    ids.insert(v.id);
    if (i < mesh.corner_count()) {
      EXPECT_EQ(v.kind, hanoi::VertexKind::CellCorner);
      EXPECT_EQ(v.level, 3);
    } else {
      EXPECT_EQ(v.kind, hanoi::VertexKind::SegmentInterior);
      EXPECT_GE(v.level, 1);
    }
  }
  EXPECT_EQ(ids.size(), mesh.node_count());
}

TEST(Mesh, SegmentInteriorUniformInParameter) {
  const auto mesh = hanoi::build_mesh(Params(0.25), 2, 4);
  for (const auto& s : mesh.segments()) {
    ASSERT_EQ(s.interior.size(), 3u);
    const Point a = mesh.vertices()[s.a].pos;
    const Point b = mesh.vertices()[s.b].pos;
    for (std::size_t i = 0; i < 3; ++i) {
      const double t = static_cast<double>(i + 1) / 4.0;
      expect_near(mesh.vertices()[s.interior[i]].pos, {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, 1e-15);
      EXPECT_EQ(mesh.vertices()[s.interior[i]].level, s.level);
    }
    EXPECT_LT(mesh.vertices()[s.a].id, mesh.corner_count());
    EXPECT_LT(mesh.vertices()[s.b].id, mesh.corner_count());
  }
}

TEST(Mesh, BoundaryIsOuterCorners) {
  for (int n = 0; n <= 5; ++n) {
    const auto mesh = hanoi::build_mesh(Params(0.25), n, 2);
    const auto b = mesh.boundary();
    for (int i = 0; i < 3; ++i) expect_near(mesh.vertices()[b[i]].pos, hanoi::corner(i + 1), 1e-15);
  }
}

TEST(Mesh, Connected) {
  for (int n = 0; n <= 6; ++n) EXPECT_TRUE(hanoi::build_mesh(Params(0.3), n, 2).is_connected());
}

TEST(Mesh, DeterministicDump) {
  const auto a = hanoi::build_mesh(Params(0.25), 4, 3);
  const auto b = hanoi::build_mesh(Params(0.25), 4, 3);
  EXPECT_EQ(hanoi::io::mesh_json(a).dump(), hanoi::io::mesh_json(b).dump());
}

TEST(Mesh, DiscreteEdgesJoinCornersOfOneCell) {
  const auto mesh = hanoi::build_mesh(Params(0.25), 3, 1);
  for (const auto& e : mesh.discrete_edges()) {
    EXPECT_EQ(e.a / 3, e.b / 3);
    EXPECT_EQ(e.word.size(), 3u);
    EXPECT_EQ(e.word.rank(), e.a / 3);
  }
}
