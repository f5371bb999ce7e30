#include "pnw/phase_noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "pnw/signal.hpp"

namespace {

constexpr double kPi = std::numbers::pi;
using pnw::ChannelConfig;
using pnw::Stream;

ChannelConfig fine_config(double x, int M) {
    // One receiver sample per symbol, Delta = Ts = 1, M fine cells, and beta
    // chosen so pi * beta * Delta = x.
    ChannelConfig cfg;
    cfg.beta = x / kPi;
    cfg.Ts = 1.0;
    cfg.L = 1;
    cfg.L_sim = M;
    return cfg;
}

// Accumulates filter-factor statistics over `n_intervals` unit intervals,
// chunked so path memory stays bounded.
struct FactorMoments {
    std::vector<double> re, im, f2, f4;
};

FactorMoments simulate_factors(double x, int M, std::size_t n_intervals, Stream& rng) {
    const ChannelConfig cfg = fine_config(x, M);
    const std::vector<double> g = pnw::Pulse::square().samples(M, cfg.Ts);
    FactorMoments out;
    out.re.reserve(n_intervals);
    out.im.reserve(n_intervals);
    out.f2.reserve(n_intervals);
    out.f4.reserve(n_intervals);
    const std::size_t chunk = 2000;
    std::size_t done = 0;
    while (done < n_intervals) {
        const std::size_t todo = std::min(chunk, n_intervals - done);
        const auto path = pnw::sample_wiener_path(cfg, todo * M - 1, cfg.Ts / M, rng);
        const auto factors = pnw::filter_factors_from_path(path, cfg, g);
        EXPECT_EQ(factors.size(), todo);
        for (const auto& f : factors) {
            const double n2 = std::norm(f.value);
            out.re.push_back(f.value.real());
            out.im.push_back(f.value.imag());
            out.f2.push_back(n2);
            out.f4.push_back(n2 * n2);
        }
        done += todo;
    }
    return out;
}

// Exact moments of the discretized factor (1/M) sum_i e^{j T_i}, T_0 = 0,
// T_i - T_{i-1} i.i.d. N(0, 2x/M): the first two follow from the geometric
// structure, the fourth from summing the Gaussian characteristic function
// over all index quadruples.
double disc_ef1(double x, int M) {
    const double r = std::exp(-x / M);
    double s = 0.0, p = 1.0;
    for (int i = 0; i < M; ++i) {
        s += p;
        p *= r;
    }
    return s / M;
}

double disc_ef2(double x, int M) {
    const double r = std::exp(-x / M);
    double s = static_cast<double>(M);
    double p = r;
    for (int d = 1; d < M; ++d) {
        s += 2.0 * (M - d) * p;
        p *= r;
    }
    return s / (static_cast<double>(M) * M);
}

double disc_ef4(double x, int M) {
    // Prefix indicators: step m (1-based) is crossed by index i iff i >= m.
    std::vector<std::vector<int>> pair_steps;
    pair_steps.reserve(static_cast<std::size_t>(M) * M);
    for (int i = 0; i < M; ++i) {
        for (int k = 0; k < M; ++k) {
            std::vector<int> v(M - 1);
            for (int m = 1; m < M; ++m) v[m - 1] = (i >= m) + (k >= m);
            pair_steps.push_back(std::move(v));
        }
    }
    const double c = x / M;
    double total = 0.0;
    for (const auto& up : pair_steps) {
        for (const auto& dn : pair_steps) {
            int h = 0;
            for (int m = 0; m < M - 1; ++m) {
                const int d = up[m] - dn[m];
                h += d * d;
            }
            total += std::exp(-c * h);
        }
    }
    const double m2 = static_cast<double>(M) * M;
    return total / (m2 * m2);
}

TEST(ChannelConfig, ValidatesFields) {
    ChannelConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_DOUBLE_EQ(cfg.delta() * cfg.L, cfg.Ts);

    ChannelConfig bad = cfg;
    bad.beta = -1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.Ts = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.L = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.L = 3;
    bad.L_sim = 64;  // not a multiple of 3
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.sigmaN2 = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.P = -2.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);

    ChannelConfig derived;
    derived.Ts = 2.0;
    derived.L = 8;
    derived.L_sim = 64;
    derived.P = 4.0;
    derived.sigmaN2 = 0.5;
    EXPECT_DOUBLE_EQ(derived.delta(), 0.25);
    EXPECT_DOUBLE_EQ(derived.snr(), 4.0);
    EXPECT_EQ(derived.fine_per_sample(), 8);
}

TEST(WienerPath, ZeroLinewidthIsConstant) {
    ChannelConfig cfg;
    cfg.beta = 0.0;
    Stream rng(1, 0);
    const auto path = pnw::sample_wiener_path(cfg, 100, 0.1, rng);
    ASSERT_EQ(path.increments.size(), 101u);
    EXPECT_GE(path.increments[0], -kPi);
    EXPECT_LT(path.increments[0], kPi);
    for (std::size_t k = 1; k < path.increments.size(); ++k) {
        EXPECT_EQ(path.increments[k], 0.0);
        EXPECT_EQ(path.cumulative[k], path.cumulative[0]);
    }
}

TEST(WienerPath, PrefixSumIdentity) {
    ChannelConfig cfg;
    cfg.beta = 0.7;
    Stream rng(2, 0);
    const auto path = pnw::sample_wiener_path(cfg, 5000, 0.01, rng);
    for (std::size_t k = 1; k < path.increments.size(); ++k)
        ASSERT_EQ(path.cumulative[k] - path.cumulative[k - 1], path.increments[k]);
}

TEST(WienerPath, IncrementVarianceBand) {
    // 2 pi beta dt = 1 -> unit increment variance; n = 1e6 pins the sample
    // variance inside [0.99, 1.01] (a > 3 sigma chi-square band).
    ChannelConfig cfg;
    cfg.beta = 1.0 / (2.0 * kPi);
    Stream rng(3, 0);
    const std::size_t n = 1000000;
    const auto path = pnw::sample_wiener_path(cfg, n, 1.0, rng);
    std::vector<double> inc(path.increments.begin() + 1, path.increments.end());
    const auto st = oracle::moment_stats(inc);
    EXPECT_GT(st.var, 0.99);
    EXPECT_LT(st.var, 1.01);
}

TEST(WienerPath, DisjointSegmentsUncorrelated) {
    ChannelConfig cfg;
    cfg.beta = 1.0 / (2.0 * kPi);
    Stream rng(4, 0);
    const std::size_t n = 1000000;
    const auto path = pnw::sample_wiener_path(cfg, n, 1.0, rng);
    const std::size_t half = n / 2;
    std::vector<double> first(path.increments.begin() + 1, path.increments.begin() + 1 + half);
    std::vector<double> second(path.increments.begin() + 1 + half,
                               path.increments.begin() + 1 + 2 * half);
    EXPECT_LT(std::abs(oracle::correlation(first, second)), 0.01);
}

TEST(WienerPath, InitialPhaseUniformRange) {
    ChannelConfig cfg;
    cfg.beta = 0.1;
    Stream rng(5, 0);
    double mean = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto path = pnw::sample_wiener_path(cfg, 1, 0.5, rng);
        ASSERT_GE(path.increments[0], -kPi);
        ASSERT_LT(path.increments[0], kPi);
        mean += path.increments[0];
    }
    mean /= n;
    EXPECT_NEAR(mean, 0.0, 4.0 * (2.0 * kPi / std::sqrt(12.0)) / std::sqrt(double(n)));
}

TEST(WienerPath, ParameterErrors) {
    ChannelConfig cfg;
    Stream rng(6, 0);
    EXPECT_THROW(pnw::sample_wiener_path(cfg, 0, 0.1, rng), std::invalid_argument);
    EXPECT_THROW(pnw::sample_wiener_path(cfg, 10, 0.0, rng), std::invalid_argument);
    cfg.beta = -1.0;
    EXPECT_THROW(pnw::sample_wiener_path(cfg, 10, 0.1, rng), std::invalid_argument);
}

TEST(Awgn, MomentsAndCircularSymmetry) {
    Stream rng(7, 0);
    const std::size_t n = 1000000;
    const auto z = pnw::sample_awgn(n, 1.0, rng);
    std::complex<double> mean{0.0, 0.0}, pseudo{0.0, 0.0};
    double power = 0.0;
    for (const auto& v : z) {
        mean += v;
        pseudo += v * v;
        power += std::norm(v);
    }
    mean /= static_cast<double>(n);
    pseudo /= static_cast<double>(n);
    power /= static_cast<double>(n);
    EXPECT_LT(std::abs(mean), 0.01);
    EXPECT_GT(power, 0.99);
    EXPECT_LT(power, 1.01);
    EXPECT_LT(std::abs(pseudo), 0.01);
}

TEST(Awgn, EmptyAndErrors) {
    Stream rng(8, 0);
    EXPECT_TRUE(pnw::sample_awgn(0, 1.0, rng).empty());
    EXPECT_THROW(pnw::sample_awgn(10, 0.0, rng), std::invalid_argument);
    EXPECT_THROW(pnw::sample_awgn(10, -1.0, rng), std::invalid_argument);
}

TEST(WrappedGaussian, FrozenReferences) {
    struct Ref {
        double w, sigma2, value;
    };
    const Ref refs[] = {
        {0.0, 1.0, 0.39894228253600366},
        {1.0, 1.0, 0.24197107116625601},
        {3.0, 1.0, 0.0062524443120396411},
        {0.0, 10.0, 0.16129969889037222},
        {2.0, 10.0, 0.15826240959537483},
        {0.0, 0.01, 3.9894228040143267},
        {0.0, 150.0, 0.15915494309189534},
    };
    for (const auto& r : refs)
        EXPECT_NEAR(pnw::wrapped_gaussian_pdf(r.w, r.sigma2), r.value, 1e-12 * r.value)
            << "w=" << r.w << " sigma2=" << r.sigma2;
}

TEST(WrappedGaussian, SymmetryAndPeriodicity) {
    for (double sigma2 : {0.05, 0.8, 5.0}) {
        for (double w : {0.1, 0.9, 2.2, 3.1}) {
            const double p = pnw::wrapped_gaussian_pdf(w, sigma2);
            EXPECT_NEAR(pnw::wrapped_gaussian_pdf(-w, sigma2), p, 1e-14 * p);
            EXPECT_NEAR(pnw::wrapped_gaussian_pdf(w + 2.0 * kPi, sigma2), p, 1e-12 * p);
            EXPECT_NEAR(pnw::wrapped_gaussian_pdf(w - 6.0 * kPi, sigma2), p, 1e-12 * p);
        }
    }
}

TEST(WrappedGaussian, NormalizedOnOnePeriod) {
    for (double sigma2 : {1e-4, 1e-2, 1.0, 10.0}) {
        const double mass = pnw::integrate_gk(
            [sigma2](double w) { return pnw::wrapped_gaussian_pdf(w, sigma2); }, -kPi, kPi,
            1e-11);
        EXPECT_NEAR(mass, 1.0, 1e-9) << "sigma2=" << sigma2;
    }
}

TEST(WrappedGaussian, UniformLimit) {
    const double u = 1.0 / (2.0 * kPi);
    for (double w = -3.0; w <= 3.0; w += 0.37)
        EXPECT_NEAR(pnw::wrapped_gaussian_pdf(w, 1e4), u, 1e-6);
}

TEST(WrappedGaussian, ParameterErrors) {
    EXPECT_THROW(pnw::wrapped_gaussian_pdf(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(pnw::wrapped_gaussian_pdf(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(FilterFactors, ConstantPhaseGivesUnity) {
    ChannelConfig cfg = fine_config(0.0, 64);
    cfg.beta = 0.0;
    Stream rng(9, 0);
    const auto path = pnw::sample_wiener_path(cfg, 10 * 64 - 1, 1.0 / 64, rng);
    const auto g = pnw::Pulse::square().samples(64, 1.0);
    const auto factors = pnw::filter_factors_from_path(path, cfg, g);
    ASSERT_EQ(factors.size(), 10u);
    for (const auto& f : factors) {
        EXPECT_DOUBLE_EQ(f.value.real(), 1.0);
        EXPECT_DOUBLE_EQ(f.value.imag(), 0.0);
    }
}

TEST(FilterFactors, MagnitudeBoundedByOne) {
    const ChannelConfig cfg = fine_config(2.0, 32);
    Stream rng(10, 0);
    const auto path = pnw::sample_wiener_path(cfg, 1000 * 32 - 1, 1.0 / 32, rng);
    const auto g = pnw::Pulse::square().samples(32, 1.0);
    for (const auto& f : pnw::filter_factors_from_path(path, cfg, g))
        EXPECT_LE(std::abs(f.value), 1.0 + 1e-12);
}

TEST(FilterFactors, InputErrors) {
    const ChannelConfig cfg = fine_config(0.5, 64);
    Stream rng(11, 0);
    const auto short_path = pnw::sample_wiener_path(cfg, 10, 1.0 / 64, rng);
    const auto g = pnw::Pulse::square().samples(64, 1.0);
    EXPECT_THROW(pnw::filter_factors_from_path(short_path, cfg, g), std::length_error);
    const auto path = pnw::sample_wiener_path(cfg, 64 * 4 - 1, 1.0 / 64, rng);
    const std::vector<double> wrong_g(32, 1.0);
    EXPECT_THROW(pnw::filter_factors_from_path(path, cfg, wrong_g), std::invalid_argument);
}

TEST(FilterFactors, MatchesExactFiniteGridLaw) {
    // On an M-point grid the factor's first, second and fourth moments are
    // exactly computable (geometric sums and a quadruple index sum over the
    // Gaussian characteristic function); the simulator must match them with
    // no discretization caveat at all.
    const double x = 1.0;
    const int M = 24;
    const std::size_t n = 200000;
    Stream rng(12, 0);
    const auto mc = simulate_factors(x, M, n, rng);
    const auto st_re = oracle::moment_stats(mc.re);
    const auto st_im = oracle::moment_stats(mc.im);
    const auto st_f2 = oracle::moment_stats(mc.f2);
    const auto st_f4 = oracle::moment_stats(mc.f4);
    EXPECT_NEAR(st_re.mean, disc_ef1(x, M), 4.0 * st_re.se_mean);
    EXPECT_NEAR(st_im.mean, 0.0, 4.0 * st_im.se_mean);
    EXPECT_NEAR(st_f2.mean, disc_ef2(x, M), 4.0 * st_f2.se_mean);
    EXPECT_NEAR(st_f4.mean, disc_ef4(x, M), 4.0 * st_f4.se_mean);
}

TEST(FilterFactors, MeanMatchesClosedFormAtUnitExponent) {
    // pi beta Delta = 1: closed-form mean 1 - 1/e over 1e6 intervals, 3 sigma.
    // At 512 fine cells the grid bias of the mean is 6.2e-4 (0.36 of one
    // sigma), small enough to sit inside the band; the second and fourth
    // moments ride along with 4-sigma bands.
    const double x = 1.0;
    const int M = 512;
    const std::size_t n = 1000000;
    Stream rng(13, 0);
    const auto mc = simulate_factors(x, M, n, rng);
    const auto closed = pnw::closed_form_moments(x / kPi, 1.0, 1);
    const auto st_re = oracle::moment_stats(mc.re);
    const auto st_im = oracle::moment_stats(mc.im);
    const auto st_f2 = oracle::moment_stats(mc.f2);
    const auto st_f4 = oracle::moment_stats(mc.f4);
    EXPECT_NEAR(st_re.mean, closed.ef1, 3.0 * st_re.se_mean);
    EXPECT_NEAR(st_im.mean, 0.0, 4.0 * st_im.se_mean);
    EXPECT_NEAR(st_f2.mean, closed.ef1_sq, 4.0 * st_f2.se_mean);
    EXPECT_NEAR(st_f4.mean, closed.ef1_4, 4.0 * st_f4.se_mean);
    EXPECT_NEAR(st_f2.var, closed.var_f1sq, 4.0 * st_f2.se_var);
}

TEST(FilterFactors, MomentsMatchClosedFormAtSmallExponents) {
    for (double x : {0.01, 0.1}) {
        const int M = 512;
        const std::size_t n = 100000;
        Stream rng(x < 0.05 ? 14 : 15, 0);
        const auto mc = simulate_factors(x, M, n, rng);
        const auto closed = pnw::closed_form_moments(x / kPi, 1.0, 1);
        const auto st_re = oracle::moment_stats(mc.re);
        const auto st_f2 = oracle::moment_stats(mc.f2);
        const auto st_f4 = oracle::moment_stats(mc.f4);
        EXPECT_NEAR(st_re.mean, closed.ef1, 4.0 * st_re.se_mean) << "x=" << x;
        EXPECT_NEAR(st_f2.mean, closed.ef1_sq, 4.0 * st_f2.se_mean) << "x=" << x;
        EXPECT_NEAR(st_f4.mean, closed.ef1_4, 4.0 * st_f4.se_mean) << "x=" << x;
        EXPECT_NEAR(st_f2.var, closed.var_f1sq, 4.0 * st_f2.se_var) << "x=" << x;
    }
}

TEST(FilterFactors, DisjointIntervalsPassIidCheck) {
    const double x = 0.5;
    const int M = 64;
    const std::size_t n = 10000;
    Stream rng(16, 0);
    const auto mc = simulate_factors(x, M, n, rng);
    std::vector<double> a(mc.f2.begin(), mc.f2.end() - 1), b(mc.f2.begin() + 1, mc.f2.end());
    EXPECT_LT(std::abs(oracle::correlation(a, b)), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(ClosedFormMoments, FrozenReferences) {
    struct Ref {
        double x, ef1, ef2, ef4, varf2, varf1;
    };
    const Ref refs[] = {
        {1.0, 0.63212055882855768, 0.73575888234288464, 0.57276488218509983,
         0.031423749238649058, 0.33618248144915659},
        {0.1, 0.95162581964040427, 0.96748360719191463, 0.93681832239121335,
         0.00079379220613437917, 0.061891906585643399},
        {0.01, 0.99501662508319464, 0.99667498336107148, 0.99336981043844195,
         8.7879806498379977e-6, 0.0066168991691207481},
    };
    for (const auto& r : refs) {
        const auto m = pnw::closed_form_moments(r.x / kPi, 1.0, 1);
        EXPECT_NEAR(m.ef1, r.ef1, 1e-12 * r.ef1) << "x=" << r.x;
        EXPECT_NEAR(m.ef1_sq, r.ef2, 1e-12 * r.ef2) << "x=" << r.x;
        EXPECT_NEAR(m.ef1_4, r.ef4, 1e-12 * r.ef4) << "x=" << r.x;
        EXPECT_NEAR(m.var_f1sq, r.varf2, 1e-12 * r.varf2) << "x=" << r.x;
        EXPECT_NEAR(m.var_f1, r.varf1, 1e-12 * r.varf1) << "x=" << r.x;
        EXPECT_NEAR(m.a, std::exp(-r.x), 1e-15) << "x=" << r.x;
    }
}

TEST(ClosedFormMoments, InternalConsistency) {
    for (double x : {0.05, 0.3, 0.6, 1.0, 2.0, 5.0}) {
        for (int L : {1, 4, 16}) {
            const auto m = pnw::closed_form_moments(x / kPi, 1.0, L);
            EXPECT_NEAR(m.var_f1, m.ef1_sq - m.ef1 * m.ef1, 1e-10 * m.var_f1) << "x=" << x;
            EXPECT_DOUBLE_EQ(m.eg, m.ef1_sq);
            EXPECT_DOUBLE_EQ(m.var_g, m.var_f1sq / L);
            const double gap = m.eg - 1.0;
            EXPECT_DOUBLE_EQ(m.ms_g_minus_1, m.var_g + gap * gap);
            EXPECT_GE(m.var_f1sq, 0.0);
            EXPECT_LE(m.ef1_sq, 1.0);
        }
    }
}

TEST(ClosedFormMoments, SeriesAndDirectBranchesAgreeAtTheSwitch) {
    // eps is small enough that the function drift across [x-eps, x+eps] sits
    // far below the bands, so any discontinuity is branch disagreement. The
    // looser var_f1sq band covers the direct branch's cancellation noise
    // (its numerator contracts by ~2e6 at the switch point).
    const double eps = 1e-12;
    const auto below = pnw::closed_form_moments((0.25 - eps) / kPi, 1.0, 1);
    const auto above = pnw::closed_form_moments((0.25 + eps) / kPi, 1.0, 1);
    EXPECT_NEAR(below.ef1, above.ef1, 1e-10 * below.ef1);
    EXPECT_NEAR(below.ef1_sq, above.ef1_sq, 1e-10 * below.ef1_sq);
    EXPECT_NEAR(below.ef1_4, above.ef1_4, 1e-10 * below.ef1_4);
    EXPECT_NEAR(below.var_f1sq, above.var_f1sq, 1e-7 * below.var_f1sq);
    EXPECT_NEAR(below.var_f1, above.var_f1, 1e-10 * below.var_f1);
}

TEST(ClosedFormMoments, ZeroLinewidthDegenerate) {
    const auto m = pnw::closed_form_moments(0.0, 1.0, 8);
    EXPECT_DOUBLE_EQ(m.a, 1.0);
    EXPECT_DOUBLE_EQ(m.ef1, 1.0);
    EXPECT_DOUBLE_EQ(m.ef1_sq, 1.0);
    EXPECT_DOUBLE_EQ(m.ef1_4, 1.0);
    EXPECT_DOUBLE_EQ(m.var_f1, 0.0);
    EXPECT_DOUBLE_EQ(m.var_f1sq, 0.0);
    EXPECT_DOUBLE_EQ(m.ms_g_minus_1, 0.0);
}

TEST(MomentLimits, ClosedFormValues) {
    const auto lim = pnw::moment_limits(3.0 / kPi);  // pi beta = 3
    EXPECT_DOUBLE_EQ(lim.var_g_over_delta3, 0.8);
    EXPECT_DOUBLE_EQ(lim.var_g_over_delta2, 0.0);
    EXPECT_DOUBLE_EQ(lim.eg_gap_sq_over_delta2, 9.0 / 9.0);
    EXPECT_DOUBLE_EQ(lim.ms_g_over_delta2, 1.0);
    EXPECT_THROW(pnw::moment_limits(0.0), std::invalid_argument);
}

TEST(MomentLimits, RecoveredOnDyadicGrid) {
    const double beta = 1.0;
    const auto lim = pnw::moment_limits(beta);
    double prev_err = 1e9;
    for (int k = 4; k <= 14; ++k) {
        const double delta = std::ldexp(1.0, -k);
        const int L = 1 << k;  // Ts = 1, so L = 1/Delta
        const auto m = pnw::closed_form_moments(beta, delta, L);
        const double r3 = m.var_g / (delta * delta * delta);
        const double gap2 = (m.eg - 1.0) * (m.eg - 1.0) / (delta * delta);
        const double ms2 = m.ms_g_minus_1 / (delta * delta);
        const double err = std::abs(r3 / lim.var_g_over_delta3 - 1.0);
        if (k >= 6) EXPECT_LT(err, prev_err * 0.75) << "k=" << k;  // ~O(Delta) decay
        prev_err = err;
        if (k >= 12) {
            EXPECT_NEAR(r3, lim.var_g_over_delta3, 0.01 * lim.var_g_over_delta3) << "k=" << k;
            EXPECT_NEAR(gap2, lim.eg_gap_sq_over_delta2, 0.01 * lim.eg_gap_sq_over_delta2)
                << "k=" << k;
            EXPECT_NEAR(ms2, lim.ms_g_over_delta2, 0.01 * lim.ms_g_over_delta2) << "k=" << k;
        }
        // Var(G)/Delta^2 heads to zero.
        EXPECT_LT(m.var_g / (delta * delta), 4.0 * kPi * kPi / 45.0 * delta * 1.5);
    }
}

} // namespace
