#include <doctest.h>

#include <cmath>
#include <limits>

#include "admmnn/random.hpp"
#include "admmnn/stats.hpp"

using namespace admmnn;

// Reference values below were computed with scipy.stats and frozen.

TEST_CASE("summaries") {
  const RunSummary same = summarize("m", {0.5, 0.5});
  CHECK(same.mean == 0.5);
  CHECK(same.std == 0.0);
  CHECK_FALSE(same.degenerate);

  const RunSummary s = summarize("m", {1, 2, 3});
  CHECK(s.mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.std == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.accuracies.size() == 3);

  const RunSummary single = summarize("m", {0.7});
  CHECK(single.mean == 0.7);
  CHECK(single.std == 0.0);
  CHECK(single.degenerate);

  CHECK_THROWS(summarize("m", {}));
}

TEST_CASE("student t distribution") {
  CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(student_t_cdf(-1.2247448713915890, 4.0) ==
        doctest::Approx(0.1439320673633454).epsilon(1e-10));
  CHECK(student_t_cdf(2.5, 3.3) == doctest::Approx(0.9599735818458228).epsilon(1e-10));
  CHECK(student_t_cdf(0.7, 1.0) == doctest::Approx(0.6944001122142147).epsilon(1e-10));
  CHECK(student_t_cdf(-3.0, 150.0) == doctest::Approx(0.0015811383041614564).epsilon(1e-9));
  CHECK(student_t_cdf(std::numeric_limits<double>::infinity(), 3.0) == 1.0);

  CHECK(student_t_quantile(0.995, 397.96) == doctest::Approx(2.5882396578501363).epsilon(1e-10));
  CHECK(student_t_quantile(0.995, 4.0) == doctest::Approx(4.604094871415897).epsilon(1e-10));
  CHECK(student_t_quantile(0.005, 4.0) == doctest::Approx(-4.604094871415897).epsilon(1e-10));
  CHECK_THROWS(student_t_quantile(1.0, 4.0));
  CHECK_THROWS(student_t_cdf(1.0, 0.0));

  // Two-sided p of a published listing: t = -1.8033, df = 397.96.
  CHECK(2.0 * student_t_cdf(-1.8033, 397.96) == doctest::Approx(0.07209734).epsilon(1e-6));

  SUBCASE("symmetry and monotonicity") {
    for (double df : {1.0, 2.5, 10.0, 300.0}) {
      double prev = 0.0;
      for (double t = -8.0; t <= 8.0; t += 0.25) {
        const double c = student_t_cdf(t, df);
        CHECK(c >= prev);
        CHECK(c + student_t_cdf(-t, df) == doctest::Approx(1.0).epsilon(1e-13));
        prev = c;
      }
    }
  }

  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a.
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(incomplete_beta(2.5, 1.0, 0.4) == doctest::Approx(std::pow(0.4, 2.5)).epsilon(1e-13));
}

TEST_CASE("welch t-test") {
  SUBCASE("hand case") {
    const WelchResult r = welch_t_test(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4});
    CHECK(r.t == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(std::abs(r.df - 4.0) <= 1e-12);
    CHECK(r.p_two_sided == doctest::Approx(0.2878641347266908).epsilon(1e-9));
    CHECK(r.mean_a == 2.0);
    CHECK(r.mean_b == 3.0);
    CHECK(r.ci99_lo <= r.ci99_hi);
  }

  SUBCASE("unequal sizes and variances") {
    const std::vector<double> a{0.71, 0.78, 0.80, 0.74, 0.69};
    const std::vector<double> b{0.52, 0.61, 0.47, 0.70, 0.55, 0.58};
    const WelchResult r = welch_t_test(a, b);
    CHECK(r.t == doctest::Approx(4.486501916890241).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(8.19519392889939).epsilon(1e-12));
    CHECK(r.p_two_sided == doctest::Approx(0.0019189288136266904).epsilon(1e-8));
    CHECK(r.ci99_lo == doctest::Approx(0.04433488383421039).epsilon(1e-9));
    CHECK(r.ci99_hi == doctest::Approx(0.3003317828324563).epsilon(1e-9));
  }

  SUBCASE("identical samples") {
    const std::vector<double> a{0.2, 0.5, 0.9, 0.4};
    const WelchResult r = welch_t_test(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p_two_sided == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("equal variance and size reduce to the pooled test") {
    SeededRng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + rng.next_below(20);
      std::vector<double> a(n), b(n);
      for (double& v : a) v = rng.next_uniform();
      const double shift = rng.next_uniform() - 0.5;
      for (std::size_t i = 0; i < n; ++i) b[i] = a[i] + shift;
      const WelchResult r = welch_t_test(a, b);
      const double s = sample_std(a);
      const double pooled_t = (mean(a) - mean(b)) / (s * std::sqrt(2.0 / static_cast<double>(n)));
      CHECK(r.df == doctest::Approx(2.0 * static_cast<double>(n) - 2.0).epsilon(1e-9));
      CHECK(r.t == doctest::Approx(pooled_t).epsilon(1e-9));
    }
  }

  SUBCASE("zero variance in both samples") {
    const WelchResult same = welch_t_test(std::vector<double>{1, 1}, std::vector<double>{1, 1, 1});
    CHECK(same.t == 0.0);
    CHECK(same.p_two_sided == 1.0);
    CHECK(same.df == 3.0);
    const WelchResult apart = welch_t_test(std::vector<double>{2, 2}, std::vector<double>{1, 1});
    CHECK(std::isinf(apart.t));
    CHECK(apart.t > 0);
    CHECK(apart.p_two_sided == 0.0);
  }

  SUBCASE("antisymmetry, shift invariance, scale equivariance") {
    SeededRng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t na = 2 + rng.next_below(30);
      const std::size_t nb = 2 + rng.next_below(30);
      std::vector<double> a(na), b(nb);
      for (double& v : a) v = rng.next_uniform();
      for (double& v : b) v = 0.2 + rng.next_uniform();
      const WelchResult ab = welch_t_test(a, b);
      const WelchResult ba = welch_t_test(b, a);
      CHECK(ab.t == -ba.t);
      CHECK(ab.p_two_sided == ba.p_two_sided);
      CHECK(ab.df > 0.0);
      CHECK(ab.ci99_lo <= ab.ci99_hi);

      const double c = 10.0 * rng.next_uniform() - 5.0;
      std::vector<double> as = a, bs = b;
      for (double& v : as) v += c;
      for (double& v : bs) v += c;
      const WelchResult sh = welch_t_test(as, bs);
      CHECK(std::abs(sh.t - ab.t) <= 1e-12 * std::max(1.0, std::abs(ab.t)));
      CHECK(std::abs(sh.df - ab.df) <= 1e-12 * std::max(1.0, ab.df));
      CHECK(std::abs(sh.p_two_sided - ab.p_two_sided) <= 1e-12);

      std::vector<double> ak = a, bk = b;
      for (double& v : ak) v *= 4.0;
      for (double& v : bk) v *= 4.0;
      CHECK(welch_t_test(ak, bk).t == ab.t);
    }
  }

  SUBCASE("too few values") {
    CHECK_THROWS(welch_t_test(std::vector<double>{1}, std::vector<double>{1, 2}));
  }
}

TEST_CASE("spearman correlation") {
  CHECK(spearman_correlation(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 1, 4, 3, 5}) ==
        doctest::Approx(0.8).epsilon(1e-14));
  CHECK(spearman_correlation(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 3, 2, 4}) ==
        doctest::Approx(0.9486832980505139).epsilon(1e-14));
  CHECK(spearman_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{9, 5, 1}) ==
        doctest::Approx(-1.0));
  CHECK_THROWS(spearman_correlation(std::vector<double>{1, 2}, std::vector<double>{1}));
}
