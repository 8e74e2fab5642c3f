// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "qlrs/channel.hpp"
#include "qlrs/geometry.hpp"

using namespace qlrs;

namespace {

ErrorVector ev(std::initializer_list<int> support,
               std::initializer_list<int> signs) {
  ErrorVector e;
  e.support.assign(support);
  for (int s : signs) e.signs.push_back(static_cast<std::int8_t>(s));
  return e;
}

}  // namespace

TEST_CASE("alpha star constant") {
  CHECK(alpha_star() == doctest::Approx(0.13933).epsilon(1e-4));
  CHECK(std::abs(alpha_star() - (0.5 - 1.0 / (4.0 * std::log(2.0)))) == 0.0);
}

TEST_CASE("distance to the separating hyperplane") {
  SUBCASE("coordinate vectors give the amplitude") {
    Eigen::VectorXd a(3);
    a << 1.0, 2.0, 0.5;
    RngStream rng(1, 0, 0, StreamPurpose::Spreading);
    const ChannelInstance inst =
        make_instance_from_s(gen_spreading(rng, 16, 3), a, 0.0);
    for (int k = 0; k < 3; ++k) {
      CHECK(d_gml(ev({k}, {1}), inst.H) == std::sqrt(a[k] * a[k]));
    }
  }
  SUBCASE("K=2 hand value and sign symmetry") {
    auto [r, h] = test::two_user_gram(-0.25);
    const double d = d_gml(ev({0, 1}, {1, 1}), h);
    CHECK(d == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
    CHECK(d == d_gml(ev({0, 1}, {-1, -1}), h));
  }
  SUBCASE("degenerate form clamps to zero") {
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 1.0, 1.0, 1.0;
    CHECK(d_gml(ev({0, 1}, {1, -1}), h) == 0.0);
    CHECK_THROWS_AS(d_gml(ErrorVector{}, h), std::invalid_argument);
  }
}

TEST_CASE("distance bound for single-flip regions") {
  Eigen::VectorXd a = Eigen::VectorXd::Ones(2);
  SUBCASE("weight one matches d_gml exactly") {
    auto [r, h] = test::two_user_gram(-0.25);
    CHECK(d_lml(ev({0}, {1}), h, a) == d_gml(ev({0}, {1}), h));
    // The general quotient agrees to an ulp even without the fast path.
    const double g = h(0, 0);
    CHECK((2.0 * g - 1.0) / std::sqrt(g) ==
          doctest::Approx(std::sqrt(g)).epsilon(1e-15));
  }
  SUBCASE("hand values at rho = -0.5 and -0.25") {
    auto [r1, h1] = test::two_user_gram(-0.5);
    CHECK(d_lml(ev({0, 1}, {1, 1}), h1, a) == doctest::Approx(0.0));
    CHECK(d_gml(ev({0, 1}, {1, 1}), h1) == doctest::Approx(1.0));
    auto [r2, h2] = test::two_user_gram(-0.25);
    const double dl = d_lml(ev({0, 1}, {1, 1}), h2, a);
    CHECK(dl == doctest::Approx(1.0 / std::sqrt(1.5)).epsilon(1e-12));
    CHECK(dl <= d_gml(ev({0, 1}, {1, 1}), h2));
  }
  SUBCASE("degenerate form returns the -inf sentinel") {
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 1.0, 1.0, 1.0;
    CHECK(d_lml(ev({0, 1}, {1, -1}), h, a) ==
          -std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("quadratic form via H matches the spreading-matrix route") {
  RngStream rng(7, 0, 0, StreamPurpose::Spreading);
  const int users = 14;
  Eigen::VectorXd a(users);
  for (int i = 0; i < users; ++i) a[i] = 0.5 + 0.1 * i;
  const ChannelInstance inst =
      make_instance_from_s(gen_spreading(rng, 40, users), a, 0.0);
  RngStream pick(8, 0, 0, StreamPurpose::Experiment);
  for (int rep = 0; rep < 500; ++rep) {
    const int w = 1 + static_cast<int>(pick.below(6));
    ErrorVector e;
    std::vector<int> idx(users);
    for (int i = 0; i < users; ++i) idx[i] = i;
    for (int i = 0; i < w; ++i) {
      const int j = i + static_cast<int>(pick.below(users - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(w);
    std::sort(idx.begin(), idx.end());
    for (int i : idx) {
      e.support.push_back(i);
      e.signs.push_back(pick.sign() > 0 ? 1 : -1);
    }
    const double via_h = d_gml(e, inst.H);
    const double via_s = std::sqrt(d_gml_sq_from_s(e, inst.S, inst.A));
    CHECK(via_h == doctest::Approx(via_s).epsilon(1e-8));
  }
}

TEST_CASE("indecomposability") {
  SUBCASE("weight one is always indecomposable") {
    auto [r, h] = test::two_user_gram(0.3);
    CHECK(is_indecomposable(ev({1}, {1}), h));
  }
  SUBCASE("orthogonal cross term decomposes") {
    const ChannelInstance inst = test::orthogonal_instance(4);
    CHECK_FALSE(is_indecomposable(ev({0, 1}, {1, 1}), inst.H));
  }
  SUBCASE("negative coupling stays indecomposable") {
    auto [r, h] = test::two_user_gram(-0.5);
    CHECK(is_indecomposable(ev({0, 1}, {1, 1}), h));
    CHECK_FALSE(is_indecomposable(ev({0, 1}, {1, -1}), h));
  }
  SUBCASE("weight cap is enforced") {
    const ChannelInstance inst = test::orthogonal_instance(4);
    CHECK_THROWS_AS(
        is_indecomposable(ev({0, 1, 2}, {1, 1, 1}), inst.H, 2),
        std::invalid_argument);
  }
}

TEST_CASE("sampled indecomposable vectors never exceed the GML distance") {
  Eigen::VectorXd a;
  long long checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    RngStream rng(900 + rep, 0, 0, StreamPurpose::Spreading);
    const int users = 12;
    const ChannelInstance inst = make_instance_from_s(
        gen_spreading(rng, 15, users), Eigen::VectorXd::Ones(users), 0.0);
    RngStream pick(901 + rep, 0, 0, StreamPurpose::Experiment);
    for (int t = 0; t < 200; ++t) {
      const int w = 2 + static_cast<int>(pick.below(5));
      ErrorVector e;
      std::vector<int> idx(users);
      for (int i = 0; i < users; ++i) idx[i] = i;
      for (int i = 0; i < w; ++i) {
        const int j = i + static_cast<int>(pick.below(users - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(w);
      std::sort(idx.begin(), idx.end());
      for (int i : idx) {
        e.support.push_back(i);
        e.signs.push_back(pick.sign() > 0 ? 1 : -1);
      }
      if (!is_indecomposable(e, inst.H)) continue;
      ++checked;
      CHECK(d_lml(e, inst.H, inst.A) <= d_gml(e, inst.H) + 1e-9);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("asymptotic efficiency reports") {
  SUBCASE("orthogonal channel reaches unit efficiency") {
    const ChannelInstance inst = test::orthogonal_instance(4);
    for (int k = 0; k < 4; ++k) {
      const AmeReport rep = ame_report(inst.H, inst.A, k, 3);
      CHECK(rep.gml_ame == 1.0);
      CHECK(rep.lml_ame_lb == 1.0);
    }
  }
  SUBCASE("two users at rho = -0.5: unit GML efficiency, zero LML bound") {
    auto [r, h] = test::two_user_gram(-0.5);
    const AmeReport rep = ame_report(h, Eigen::VectorXd::Ones(2), 0, 2);
    CHECK(rep.gml_ame == doctest::Approx(1.0));
    CHECK(rep.lml_ame_lb == doctest::Approx(0.0));
    CHECK(rep.lml_argmin.weight() == 2);
  }
  SUBCASE("two users at rho = -0.25") {
    auto [r, h] = test::two_user_gram(-0.25);
    const AmeReport rep = ame_report(h, Eigen::VectorXd::Ones(2), 0, 2);
    CHECK(rep.gml_ame == doctest::Approx(1.0));
    CHECK(rep.lml_ame_lb == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("consistent relabeling leaves the report unchanged") {
    RngStream rng(17, 0, 0, StreamPurpose::Spreading);
    const int users = 7;
    const ChannelInstance inst = make_instance_from_s(
        gen_spreading(rng, 9, users), Eigen::VectorXd::Ones(users), 0.0);
    const AmeReport base = ame_report(inst.H, inst.A, 2, 4);
    // Swap users 0 and 5 everywhere and re-ask about the same user.
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(users);
    perm.setIdentity();
    std::swap(perm.indices()[0], perm.indices()[5]);
    const Eigen::MatrixXd hp = perm.transpose() * inst.H * perm;
    const AmeReport moved = ame_report(hp, inst.A, 2, 4);
    CHECK(base.gml_ame == doctest::Approx(moved.gml_ame).epsilon(1e-12));
    CHECK(base.lml_ame_lb == doctest::Approx(moved.lml_ame_lb).epsilon(1e-12));
  }
  SUBCASE("inputs are validated") {
    const ChannelInstance inst = test::orthogonal_instance(4);
    CHECK_THROWS_AS(ame_report(inst.H, inst.A, 9, 2), std::invalid_argument);
    CHECK_THROWS_AS(ame_report(inst.H, inst.A, 0, 0), std::invalid_argument);
  }
  SUBCASE("bound ordering on random instances") {
    for (int rep = 0; rep < 20; ++rep) {
      RngStream rng(40 + rep, 0, 0, StreamPurpose::Spreading);
      const int users = 6;
      const ChannelInstance inst = make_instance_from_s(
          gen_spreading(rng, 8, users), Eigen::VectorXd::Ones(users), 0.0);
      for (int k = 0; k < users; ++k) {
        const AmeReport r = ame_report(inst.H, inst.A, k, 4);
        CHECK(r.lml_ame_lb <= r.gml_ame + 1e-9);
        CHECK(r.gml_ame <= 1.0);
        CHECK(r.lml_ame_lb >= 0.0);
      }
    }
  }
}

TEST_CASE("nested-distance experiment") {
  const std::vector<int> ladder{16, 32};
  SUBCASE("invalid weight bounds are rejected") {
    CHECK_THROWS_AS(thm1_experiment(0.8, ladder, 2, 2, 10, 1),
                    std::invalid_argument);
  }
  SUBCASE("orthogonal columns never violate") {
    const auto rows =
        thm1_experiment(0.5, ladder, 1, 3, 500, 3, 0, ColumnSource::Orthogonal);
    for (const auto& r : rows) CHECK(r.violations == 0);
  }
  SUBCASE("random columns: violations exist at small N and are rarer at large N") {
    const std::vector<int> ks{16, 256};
    const auto rows = thm1_experiment(0.8, ks, 1, 2, 4000, 4);
    CHECK(rows[0].freq > rows[1].freq);
  }
}

TEST_CASE("distance-ratio experiment") {
  const std::vector<int> ladder{32, 128};
  const Thm2Result res = thm2_experiment(0.8, ladder, 3, 400, 5);
  CHECK(res.alpha_star_value == doctest::Approx(0.13933).epsilon(1e-4));
  for (const auto& row : res.rows) {
    if (row.weight == 1) {
      CHECK(row.mean_ratio_err == 0.0);  // exact identity at weight one
      CHECK(row.max_ratio_err == 0.0);
    } else {
      CHECK(row.mean_ratio_err >= 0.0);
    }
  }
  CHECK(res.tail.empty());  // alpha above the threshold

  const Thm2Result below = thm2_experiment(0.1, std::vector<int>{24}, 2, 200, 6);
  CHECK_FALSE(below.tail.empty());
  CHECK(below.tail[0].sampled == 200);
}

TEST_CASE("fixed-point coincidence experiment") {
  SUBCASE("requires a load below the threshold") {
    CHECK_THROWS_AS(thm4_experiment(0.2, 1.0, std::vector<int>{4}, 10, 1),
                    std::invalid_argument);
  }
  SUBCASE("single user always coincides") {
    const auto rows = thm4_experiment(0.1, 2.0, std::vector<int>{1}, 200, 7);
    CHECK(rows[0].freq_lml_unique_gml == 1.0);
    CHECK(rows[0].freq_wslas_eq_gml == 1.0);
  }
  SUBCASE("small-system smoke run") {
    const auto rows = thm4_experiment(0.1, 2.5, std::vector<int>{8}, 100, 8);
    CHECK(rows[0].spreading == 80);
    CHECK(rows[0].freq_wslas_eq_gml > 0.8);
  }
}

TEST_CASE("noiseless transmission is single-flip stable") {
  // With sigma = 0 the transmitted vector maximizes the likelihood, so the
  // fixed-point condition holds at the truth.
  RngStream rng(31, 0, 0, StreamPurpose::Spreading);
  const ChannelInstance inst = make_instance_from_s(
      gen_spreading(rng, 20, 10), Eigen::VectorXd::Ones(10), 0.0);
  RngStream brng(31, 0, 0, StreamPurpose::Bits);
  RngStream nrng(31, 0, 0, StreamPurpose::Noise);
  const Eigen::VectorXd truth = random_bits(brng, 10);
  const TransmitRecord rec = transmit(inst, truth, nrng);
  Eigen::VectorXd z = inst.A.cwiseProduct(rec.y);
  z.noalias() -= inst.H * truth;
  CHECK(z.lpNorm<Eigen::Infinity>() < 1e-12);
}
