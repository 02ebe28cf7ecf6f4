#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "rashgam/blocking.hpp"
#include "rashgam/errors.hpp"
#include "rashgam/objective.hpp"
#include "rashgam/rset_fit.hpp"

using namespace rashgam;
using testutil::random_spd;
using testutil::random_vec;

namespace {

// 0/1 duplication matrix: column g has ones on the original coordinates of reduced coordinate g.
Mat substitution(std::size_t dim, const std::vector<CoordRange>& groups) {
  const auto map = reduction_map(dim, groups);
  const std::size_t r = *std::max_element(map.begin(), map.end()) + 1;
  Mat A = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < dim; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(map[i])) = 1.0;
  return A;
}

std::vector<CoordRange> random_groups(std::size_t dim, Rng& rng) {
  std::vector<CoordRange> out;
  std::size_t i = 1;
  std::uniform_int_distribution<int> len(0, 3);
  while (i < dim) {
    const std::size_t l = static_cast<std::size_t>(len(rng));
    if (l > 0 && i + l < dim) {
      out.emplace_back(i, i + l);
      i += l + 1;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("merge_quadratic and merge_linear examples") {
  Mat Q(3, 3);
  Q << 2, 0, 0, 0, 2, 1, 0, 1, 2;
  const Mat Qt = merge_quadratic(Q, {{1, 2}});
  Mat expect(2, 2);
  expect << 2, 0, 0, 6;
  CHECK((Qt - expect).norm() == 0.0);
  CHECK((merge_quadratic(Q, {{1, 1}}) - Q).norm() == 0.0);
  CHECK((merge_quadratic(Q, {}) - Q).norm() == 0.0);

  Vec l(3);
  l << 1, 2, 3;
  const Vec lt = merge_linear(l, {{1, 2}});
  REQUIRE(lt.size() == 2);
  CHECK(lt(0) == 1.0);
  CHECK(lt(1) == 5.0);
  CHECK((merge_linear(l, {}) - l).norm() == 0.0);

  CHECK_THROWS_AS(merge_quadratic(Q, {{0, 1}, {1, 2}}), SpecError);
  CHECK_THROWS_AS(merge_quadratic(Q, {{1, 3}}), SpecError);
  CHECK_THROWS_AS(reduction_map(3, {{2, 1}}), SpecError);
}

TEST_CASE("merge algebra matches the substitution oracle") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 5 + static_cast<std::size_t>(rep % 6);
    const Mat Q = random_spd(static_cast<Eigen::Index>(d), rng);
    const Vec c = random_vec(static_cast<Eigen::Index>(d), rng, 0.3);
    const auto groups = random_groups(d, rng);
    const Mat A = substitution(d, groups);
    const Mat Qt = merge_quadratic(Q, groups);
    CHECK((Qt - A.transpose() * Q * A).norm() <= 1e-12 * Q.norm());
    const Vec l = Q * c;
    CHECK((merge_linear(l, groups) - A.transpose() * l).norm() <= 1e-12 * (1 + l.norm()));
    CHECK(Eigen::LLT<Mat>(Qt).info() == Eigen::Success);

    const Ellipsoid e(Q, c);
    const SlicedRashomon s = intersect(e, groups, 0.7);
    const Mat Qa = A.transpose() * Q * A;
    const Vec ct = Qa.ldlt().solve(A.transpose() * Q * c);
    const double u = 1.0 - c.dot(Q * c) + ct.dot(Qa * ct);
    CHECK((s.center - ct).norm() <= 1e-9 * (1 + ct.norm()));
    CHECK(s.u == doctest::Approx(u).epsilon(1e-9).scale(1e-9));
    CHECK(s.empty() == (u <= 0.0));
    CHECK(s.loss_bound == 0.7);
    CHECK((s.Q_tilde - Qa).norm() <= 1e-12 * Q.norm());
  }
}

TEST_CASE("intersect examples") {
  const Mat I = Mat::Identity(2, 2);
  Vec c(2);
  c << 0.3, 0.3;
  const SlicedRashomon s = intersect(Ellipsoid(I, c), {{0, 1}}, 1.0);
  REQUIRE_FALSE(s.empty());
  CHECK(s.center(0) == doctest::Approx(0.3));
  CHECK(s.u == doctest::Approx(1.0));
  CHECK(s.ellipsoid->Q()(0, 0) == doctest::Approx(2.0));

  c << 2, -2;
  const SlicedRashomon e = intersect(Ellipsoid(I, c), {{0, 1}}, 1.0);
  CHECK(e.empty());
  CHECK(e.u == doctest::Approx(-7.0));
}

TEST_CASE("slice members expand into the parent") {
  Rng rng(12);
  int nonempty = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Mat Q = random_spd(6, rng);
    const Ellipsoid e(Q, random_vec(6, rng, 0.2));
    const std::vector<CoordRange> groups = {{1, 2}, {3, 5}};
    const SlicedRashomon s = intersect(e, groups, 1.0);
    if (s.empty()) continue;
    ++nonempty;
    const Mat A = substitution(6, groups);
    for (int t = 0; t < 200; ++t) {
      const Vec v = s.ellipsoid->sample(rng);
      const Vec w = s.expand(v);
      CHECK((w - A * v).norm() == 0.0);
      CHECK(e.quad_form(w) <= 1.0 + 1e-9);
    }
    // Membership agreement with the direct substitution form.
    for (int t = 0; t < 1000; ++t) {
      const Vec v = s.center + random_vec(3, rng, 1.5 / std::sqrt(s.Q_tilde.diagonal().minCoeff()));
      const bool direct = e.quad_form(A * v) <= 1.0;
      const double q = s.ellipsoid->quad_form(v);
      if (std::abs(q - 1.0) > 1e-9) CHECK(s.ellipsoid->contains(v).inside == direct);
    }
  }
  CHECK(nonempty > 50);
}

TEST_CASE("u does not depend on group order") {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const Ellipsoid e(random_spd(8, rng), random_vec(8, rng, 0.2));
    const std::vector<CoordRange> g1 = {{1, 2}, {4, 6}, {7, 7}};
    const std::vector<CoordRange> g2 = {{7, 7}, {4, 6}, {1, 2}};
    CHECK(intersect(e, g1, 0).u == doctest::Approx(intersect(e, g2, 0).u).epsilon(1e-12));
  }
}

TEST_CASE("tie_coords agrees with intersect on contiguous ranges") {
  Rng rng(14);
  const Ellipsoid e(random_spd(6, rng), random_vec(6, rng, 0.2));
  const SlicedRashomon a = intersect(e, {{1, 3}}, e.provenance().theta);
  const SlicedRashomon b = tie_coords(e, {{1, 2, 3}});
  CHECK(a.u == doctest::Approx(b.u).epsilon(1e-12));
  CHECK((a.Q_tilde - b.Q_tilde).norm() < 1e-12);

  // Non-contiguous ties against the oracle matrix.
  const SlicedRashomon t = tie_coords(e, {{4, 1}});
  Mat A = Mat::Zero(6, 5);
  A(0, 0) = A(1, 1) = A(4, 1) = 1;
  A(2, 2) = A(3, 3) = A(5, 4) = 1;
  CHECK((t.Q_tilde - A.transpose() * e.Q() * A).norm() < 1e-12);
  CHECK_THROWS_AS(tie_coords(e, {{1, 2}, {2, 3}}), SpecError);
  CHECK_THROWS_AS(tie_coords(e, {{9}}), SpecError);
}

TEST_CASE("count_subsets") {
  CHECK(count_subsets(5, 2, 4) == 3);
  CHECK(count_subsets(5, 2, 5) == 1);
  CHECK(count_subsets(10, 3, 7) == 35);
  CHECK(count_subsets(10, 3, 3) == 1);
  CHECK_THROWS_AS(count_subsets(5, 2, 1), SpecError);
  CHECK_THROWS_AS(count_subsets(5, 2, 6), SpecError);
  CHECK(count_subsets(400, 10, 200) == UINT64_MAX);
}

TEST_CASE("merge plans") {
  const BlockLayout layout{{3, 1, 4}};
  CHECK(layout.coefficients() == 8);
  CHECK(layout.dim() == 9);
  CHECK(layout.offset(2) == 5);
  const MergePlan plan({{1}, {}, {2, 0, 1}});
  CHECK(plan.merges() == 4);
  CHECK(plan.encode() == "[[1],[],[0,1,2]]");
  const auto g = plan.groups(layout);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == CoordRange{2, 3});
  CHECK(g[1] == CoordRange{5, 8});
  CHECK(plan.apply(layout).sizes == std::vector<std::size_t>{2, 1, 1});
  CHECK_THROWS_AS(MergePlan({{0}, {0}, {}}).validate(layout), SpecError);
  CHECK_THROWS_AS(MergePlan(std::vector<std::vector<std::size_t>>{{0}}).validate(layout), SpecError);
  CHECK_THROWS_AS(MergePlan({{0, 0}, {}, {}}), SpecError);

  const Support s({{1, 2, 1}, {4}, {1, 1, 1, 1}});
  const Support merged = plan.apply(s);
  CHECK(merged.runs(0) == std::vector<std::size_t>{1, 3});
  CHECK(merged.runs(2) == std::vector<std::size_t>{4});
}

TEST_CASE("enumerate_plans") {
  Rng rng(15);
  const BlockLayout layout{{4, 3, 5}};
  for (std::size_t Kt = 3; Kt <= 12; ++Kt) {
    const auto total = count_subsets(12, 3, Kt);
    const auto plans = enumerate_plans(layout, Kt, 1000, rng);
    CHECK(plans.size() == total);
    std::set<std::string> codes;
    for (const auto& p : plans) {
      CHECK_NOTHROW(p.validate(layout));
      CHECK(p.apply(layout).coefficients() == Kt);
      codes.insert(p.encode());
    }
    CHECK(codes.size() == plans.size());
  }
  const auto sampled = enumerate_plans(layout, 8, 20, rng);
  CHECK(sampled.size() == 20);
  std::set<std::string> codes;
  for (const auto& p : sampled) {
    CHECK(p.apply(layout).coefficients() == 8);
    codes.insert(p.encode());
  }
  CHECK(codes.size() == 20);
  Rng a(3);
  Rng b(3);
  const auto x = enumerate_plans(layout, 8, 20, a);
  const auto y = enumerate_plans(layout, 8, 20, b);
  CHECK(x == y);
}

TEST_CASE("explore") {
  Rng rng(16);
  const BlockLayout layout{{3, 3}};
  const Ellipsoid e(random_spd(7, rng), random_vec(7, rng, 0.1), {2.0, 0.1, 0.05, 1.5});
  const auto same = explore(e, layout, 6, 100, 2.0, 0.05, rng);
  REQUIRE(same.size() == 1);
  CHECK(same[0].slice.u == doctest::Approx(1.0));
  CHECK((same[0].slice.ellipsoid->Q() - e.Q()).norm() < 1e-12);
  CHECK(same[0].slice.loss_bound == doctest::Approx(2.0));

  const auto fewer = explore(e, layout, 4, 100, 2.0, 0.05, rng);
  for (const auto& x : fewer) {
    CHECK(x.slice.u > 0);
    CHECK(x.slice.loss_bound == doctest::Approx(2.0 - 0.05 * 2));
  }
  for (std::size_t i = 1; i < fewer.size(); ++i) CHECK(fewer[i - 1].plan.encode() < fewer[i].plan.encode());

  // Far-off center: every merge lands outside.
  Vec far = Vec::Zero(7);
  far << 0, 5, -5, 5, -5, 5, -5;
  const Ellipsoid off(Mat::Identity(7, 7), far);
  CHECK(explore(off, layout, 2, 100, 1.0, 0.0, rng).empty());
  CHECK_THROWS_AS(explore(off, BlockLayout{{3}}, 2, 10, 1.0, 0.0, rng), DimensionError);
}

TEST_CASE("the plateau merge has the largest u among single merges") {
  Rng rng(17);
  Vec truth(9);
  // Feature 0 bins 1 and 2 share a coefficient; all other neighbours differ.
  truth << 0.0, -1.5, 0.4, 0.4, 1.6, -1.0, 0.0, 1.0, 2.0;
  const auto data = testutil::synthetic_binned({4, 4}, 20000, truth, rng);
  const Vec w = newton_minimize(data, 1e-3, {});
  const GamObjective obj(data, 1e-3, 0.0, 0);
  const Ellipsoid e = hessian_init(obj, w, obj.value(w) * 1.01);
  const BlockLayout layout{{4, 4}};
  const auto plans = enumerate_plans(layout, 7, 100, rng);
  REQUIRE(plans.size() == 6);
  double best = -INFINITY;
  std::string best_code;
  for (const auto& p : plans) {
    const double u = intersect(e, p.groups(layout), 0).u;
    if (u > best) {
      best = u;
      best_code = p.encode();
    }
  }
  CHECK(best_code == "[[1],[]]");
}
