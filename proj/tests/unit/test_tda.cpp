#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <sstream>

#include "../oracles/matching_oracle.hpp"
#include "../oracles/rips_oracle.hpp"
#include "generators.hpp"
#include "otto_tem/tda.hpp"

using namespace otto_tem::tda;

namespace {

PersistenceDiagram diag(std::initializer_list<PersistencePair> pairs) {
  PersistenceDiagram d;
  d.pairs.assign(pairs.begin(), pairs.end());
  return d;
}

std::vector<oracle::Point> to_oracle(const PersistenceDiagram& d) {
  std::vector<oracle::Point> out;
  for (const auto& p : d.pairs) out.push_back({p.birth, p.death});
  return out;
}

std::vector<std::vector<double>> rows_of(const PointCloud& c) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto p = c.point(i);
    out.emplace_back(p.begin(), p.end());
  }
  return out;
}

PointCloud square() { return PointCloud(2, {0, 0, 1, 0, 1, 1, 0, 1}); }

PointCloud circle(std::size_t n, double radius) {
  std::vector<double> c;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    c.push_back(radius * std::cos(a));
    c.push_back(radius * std::sin(a));
  }
  return PointCloud(2, c);
}

void check_matches_oracle(const PointCloud& cloud, double max_scale) {
  const auto got = rips_persistence_h1(cloud, max_scale).sorted();
  const auto want = oracle::rips_h1(rows_of(cloud), max_scale);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(std::abs(got.pairs[i].birth - want[i].birth) <= 1e-12);
    CHECK(std::abs(got.pairs[i].death - want[i].death) <= 1e-12);
  }
}

}  // namespace

TEST_SUITE("tda") {

TEST_CASE("delay_embed examples") {
  const std::vector<double> s{0, 1, 2, 3, 4, 5};
  const auto a = delay_embed(s, 3, 1);
  REQUIRE(a.size() == 4);
  CHECK(a.dim() == 3);
  const std::vector<double> ea{0, 1, 2, 1, 2, 3, 2, 3, 4, 3, 4, 5};
  CHECK(std::equal(ea.begin(), ea.end(), a.coords().begin()));
  const auto b = delay_embed(s, 2, 2);
  const std::vector<double> eb{0, 2, 1, 3, 2, 4, 3, 5};
  REQUIRE(b.size() == 4);
  CHECK(std::equal(eb.begin(), eb.end(), b.coords().begin()));
  CHECK(delay_embed(std::vector<double>(30, 1.0), 3, 10).size() == 10);
  CHECK_THROWS_AS(delay_embed(std::vector<double>(20, 1.0), 3, 10), std::domain_error);
  CHECK_THROWS_AS(delay_embed(s, 0, 1), std::domain_error);
  CHECK_THROWS_AS(delay_embed(s, 2, 0), std::domain_error);
}

TEST_CASE("delay_embed count property") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = gen::index(rng, 1, 5), tau = gen::index(rng, 1, 12);
    const std::size_t n = (d - 1) * tau + gen::index(rng, 1, 50);
    const std::vector<double> s(n, 0.5);
    REQUIRE(delay_embed(s, d, tau).size() == n - (d - 1) * tau);
  }
}

TEST_CASE("subsample examples") {
  gen::Rng rng(3);
  const PointCloud big(3, gen::cloud_coords(rng, 100, 3));
  const auto same = subsample(big, 100, SubsampleMethod::Stride);
  CHECK(std::equal(same.coords().begin(), same.coords().end(), big.coords().begin()));

  std::vector<double> line;
  for (int i = 0; i < 10; ++i) line.push_back(i);
  const PointCloud ten(1, line);
  CHECK(subsample_indices(ten, 5, SubsampleMethod::Stride) == std::vector<std::size_t>{0, 2, 4, 6, 8});
  // ceil(10 / 4) = 3
  CHECK(subsample_indices(ten, 4, SubsampleMethod::Stride) == std::vector<std::size_t>{0, 3, 6, 9});

  const auto corners = subsample_indices(square(), 2, SubsampleMethod::MaxMin);
  CHECK(corners == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(subsample(ten, 1, SubsampleMethod::Stride), std::domain_error);
}

TEST_CASE("maxmin picks farthest points") {
  gen::Rng rng(9);
  const PointCloud c(3, gen::cloud_coords(rng, 40, 3));
  const auto idx = subsample_indices(c, 10, SubsampleMethod::MaxMin);
  REQUIRE(idx.size() == 10);
  CHECK(idx[0] == 0);
  const auto dm = c.distance_matrix();
  // Each new landmark maximizes the distance to those already chosen.
  for (std::size_t k = 1; k < idx.size(); ++k) {
    auto gap = [&](std::size_t p) {
      double g = 1e300;
      for (std::size_t t = 0; t < k; ++t) g = std::min(g, dm[p * c.size() + idx[t]]);
      return g;
    };
    for (std::size_t p = 0; p < c.size(); ++p) CHECK(gap(idx[k]) >= gap(p));
  }
}

TEST_CASE("rips examples") {
  CHECK(rips_persistence_h1(PointCloud(2, {0, 0, 1, 0, 2, 0}), 5.0).empty());
  const auto sq = rips_persistence_h1(square(), 3.0);
  REQUIRE(sq.size() == 1);
  CHECK(std::abs(sq.pairs[0].birth - 1.0) <= 1e-9);
  CHECK(std::abs(sq.pairs[0].death - std::sqrt(2.0)) <= 1e-9);
  CHECK_THROWS_AS(rips_persistence_h1(square(), 0.0), std::domain_error);
  // Truncation below the death caps the pair at max_scale.
  const auto capped = rips_persistence_h1(square(), 1.2);
  REQUIRE(capped.size() == 1);
  CHECK(capped.pairs[0].death == 1.2);
}

TEST_CASE("rips on a sampled circle has one dominant loop") {
  const auto c = circle(60, 1.0);
  const auto d = rips_persistence_h1(c, default_max_scale(c));
  REQUIRE(!d.empty());
  std::vector<double> p;
  for (const auto& pr : d.pairs) p.push_back(pr.persistence());
  std::sort(p.rbegin(), p.rend());
  CHECK(p[0] >= 0.8);
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] < 0.1);
  CHECK(default_max_scale(c) == doctest::Approx(1.0));
}

TEST_CASE("rips matches brute-force reduction on random clouds") {
  gen::Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = gen::index(rng, 1, 8);
    const PointCloud cloud(3, gen::cloud_coords(rng, n, 3));
    check_matches_oracle(cloud, 10.0);
    if (n >= 2) check_matches_oracle(cloud, std::max(1e-3, 0.6 * cloud.diameter()));
  }
}

TEST_CASE("rips matches brute-force reduction on clouds with tied distances") {
  // Integer lattice points: many equal edge lengths.
  gen::Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = gen::index(rng, 3, 8);
    std::vector<double> c(n * 2);
    for (double& v : c) v = static_cast<double>(gen::index(rng, 0, 3));
    const PointCloud cloud(2, c);
    const auto got = rips_persistence_h1(cloud, 10.0).sorted();
    const auto want = oracle::rips_h1(rows_of(cloud), 10.0);
    // Multiset of pairs is independent of tie-breaking among equal values.
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(got.pairs[i].birth == doctest::Approx(want[i].birth).epsilon(1e-12));
      CHECK(got.pairs[i].death == doctest::Approx(want[i].death).epsilon(1e-12));
    }
  }
}

TEST_CASE("rips from a distance matrix equals rips from the cloud") {
  gen::Rng rng(5);
  const PointCloud c(3, gen::cloud_coords(rng, 50, 3));
  const auto dm = c.distance_matrix();
  const auto a = rips_persistence_h1(c, 0.5);
  const auto b = rips_persistence_h1(dm, c.size(), 0.5);
  CHECK(a.sorted().pairs == b.sorted().pairs);
}

TEST_CASE("diagram csv round trip") {
  const auto d = diag({{0.125, 0.5}, {0.1, 0.30000000000000004}});
  std::stringstream ss;
  write_diagram_csv(ss, d, 0.75);
  const std::string text = ss.str();
  CHECK(text.rfind("# degree=1 max_scale=0.75\nbirth,death\n", 0) == 0);
  double ms = 0.0;
  const auto back = read_diagram_csv(ss, &ms);
  CHECK(ms == 0.75);
  REQUIRE(back.size() == 2);
  CHECK(back.pairs[0].birth == 0.125);
  CHECK(back.pairs[1].death == doctest::Approx(0.3).epsilon(1e-9));
  std::stringstream bad("birth,death\n0,1\n");
  CHECK_THROWS(read_diagram_csv(bad));
}

}  // TEST_SUITE

TEST_SUITE("distances") {

TEST_CASE("distance examples") {
  const auto a = diag({{0, 1}});
  const PersistenceDiagram empty;
  CHECK(wasserstein1(a, a) == 0.0);
  CHECK(wasserstein1(a, empty) == doctest::Approx(1.0));
  CHECK(wasserstein1(a, diag({{0, 2}})) == doctest::Approx(1.0));
  CHECK(bottleneck(a, a) == 0.0);
  CHECK(bottleneck(a, empty) == doctest::Approx(0.5));
  CHECK(bottleneck(diag({{0, 1}, {0, 3}}), a) == doctest::Approx(1.5));
  const auto q = quality_index(a, empty);
  CHECK(q.wasserstein1 == doctest::Approx(1.0));
  CHECK(q.bottleneck == doctest::Approx(0.5));
  CHECK(q.qi == q.wasserstein1 + q.bottleneck);
  const auto z = quality_index(a, a);
  CHECK(z.qi == 0.0);
  CHECK(wasserstein1(empty, empty) == 0.0);
  CHECK(bottleneck(empty, empty) == 0.0);
  PersistenceDiagram h0;
  h0.degree = 0;
  CHECK_THROWS_AS(wasserstein1(a, h0), std::domain_error);
  CHECK_THROWS_AS(bottleneck(a, h0), std::domain_error);
}

TEST_CASE("distances match exhaustive matching") {
  gen::Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const bool quantize = trial % 4 == 0;
    const auto a = gen::diagram(rng, 4, quantize);
    const auto b = gen::diagram(rng, 4, quantize);
    const auto want = oracle::exhaustive_match(to_oracle(a), to_oracle(b));
    CHECK(std::abs(wasserstein1(a, b) - want.w1) <= 1e-9);
    CHECK(std::abs(bottleneck(a, b) - want.bottleneck) <= 1e-9);
  }
}

TEST_CASE("metric properties on random triples") {
  gen::Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = gen::diagram(rng, 5), b = gen::diagram(rng, 5), c = gen::diagram(rng, 5);
    for (auto dist : {&wasserstein1, &bottleneck}) {
      const double ab = dist(a, b), ba = dist(b, a), bc = dist(b, c), ac = dist(a, c);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(ac <= ab + bc + 1e-9);
      CHECK(ab >= 0.0);
      CHECK(dist(a, a) == 0.0);
    }
    CHECK(bottleneck(a, b) <= wasserstein1(a, b) + 1e-12);
  }
}

TEST_CASE("identity of indiscernibles") {
  gen::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = gen::diagram(rng, 5);
    auto shuffled = a;
    std::shuffle(shuffled.pairs.begin(), shuffled.pairs.end(), rng);
    CHECK(wasserstein1(a, shuffled) == 0.0);
    CHECK(bottleneck(a, shuffled) == 0.0);
    auto padded = a;
    padded.pairs.push_back({0.3, 0.3});
    CHECK(wasserstein1(a, padded) == 0.0);
    CHECK(bottleneck(a, padded) == 0.0);
    if (!a.empty()) {
      auto moved = a;
      moved.pairs[0].death += 0.01;
      CHECK(wasserstein1(a, moved) > 0.0);
      CHECK(bottleneck(a, moved) > 0.0);
    }
  }
}

TEST_CASE("stability of Rips diagrams under small perturbations") {
  // A perturbation with Euclidean norm <= delta per point moves every edge
  // length by at most 2 delta.
  gen::Rng rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen::index(rng, 8, 40);
    const auto base = gen::cloud_coords(rng, n, 3);
    const double delta = gen::uniform(rng, 1e-4, 2e-2);
    auto moved = base;
    for (double& v : moved) v += gen::uniform(rng, -delta, delta) / std::sqrt(3.0);
    const auto d0 = rips_persistence_h1(PointCloud(3, base), 0.7);
    const auto d1 = rips_persistence_h1(PointCloud(3, moved), 0.7);
    CHECK(bottleneck(d0, d1) <= 2.0 * delta + 1e-9);
  }
}

}  // TEST_SUITE
