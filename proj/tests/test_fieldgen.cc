#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fieldscan/decorrelate.hh"
#include "fieldscan/errors.hh"
#include "fieldscan/fieldgen.hh"
#include "fieldscan/partition.hh"

using namespace fieldscan;

TEST_CASE("rng: streams are deterministic and seed-separated") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        double x = a.normal();
        CHECK(x == b.normal());
        CHECK(std::isfinite(x));
    }
    bool same = true;
    Rng a2(42);
    for (int i = 0; i < 10; ++i) same = same && a2.uniform() == c.uniform();
    CHECK_FALSE(same);

    CHECK(derive_seed({1, 2, 3}) == derive_seed({1, 2, 3}));
    CHECK(derive_seed({1, 2, 3}) != derive_seed({1, 2, 4}));
    CHECK(derive_seed({1, 2, 3}) != derive_seed({3, 2, 1}));
}

TEST_CASE("rng: uniforms live strictly inside (0,1)") {
    Rng r(7);
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gen_iid: determinism and column-major fill") {
    Grid a = gen_iid(20, 30, {NoiseDist::StdNormal, 123});
    Grid b = gen_iid(20, 30, {NoiseDist::StdNormal, 123});
    CHECK((a.array() == b.array()).all());
    Grid c = gen_iid(20, 30, {NoiseDist::StdNormal, 124});
    CHECK_FALSE((a.array() == c.array()).all());

    // Same stream order regardless of shape: vec agrees elementwise.
    Grid d = gen_iid(30, 20, {NoiseDist::StdNormal, 123});
    CHECK((vec(a).array() == vec(d).array()).all());
}

TEST_CASE("gen_iid: moments of the three noise laws") {
    Grid z = gen_iid(200, 200, {NoiseDist::StdNormal, 11});
    CHECK(std::abs(z.mean()) < 0.015);
    CHECK(sample_variance(z) == doctest::Approx(1.0).epsilon(0.05));

    Grid x = gen_iid(200, 200, {NoiseDist::ChiSq2Centered, 12});
    CHECK(std::abs(x.mean()) < 0.03);
    CHECK(sample_variance(x) == doctest::Approx(4.0).epsilon(0.05));
    double sd = std::sqrt(sample_variance(x));
    double skew = ((x.array() - x.mean()) / sd).cube().mean();
    CHECK(skew == doctest::Approx(2.0).epsilon(0.1));

    Grid t = gen_iid(400, 400, {NoiseDist::StudentT3, 13});
    CHECK(std::abs(t.mean()) < 0.05);
    CHECK(sample_variance(t) == doctest::Approx(3.0).epsilon(0.25));

    Grid dg = gen_iid(10, 10, {NoiseDist::Degenerate, 1});
    CHECK((dg.array() == 0.0).all());
}

TEST_CASE("sma_weights: stencil oracles") {
    Eigen::MatrixXd w = sma_weights(1, 0.5);
    Eigen::MatrixXd expect(3, 3);
    expect << 0.25, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 0.25;
    CHECK((w - expect).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::MatrixXd id = sma_weights(1, 0.0);
    CHECK(id(1, 1) == 1.0);
    CHECK(id.sum() == 1.0);

    Eigen::MatrixXd w2 = sma_weights(2, -0.3);
    for (int k = -2; k <= 2; ++k)
        for (int l = -2; l <= 2; ++l)
            CHECK(w2(k + 2, l + 2) == doctest::Approx(
                w2(-k + 2, -l + 2)));

    CHECK_THROWS_AS(sma_weights(1, 1.0), InvalidRho);
    CHECK_THROWS_AS(sma_weights(1, -1.2), InvalidRho);
}

TEST_CASE("sar_approx_weights: normalization and center weight") {
    Eigen::MatrixXd w = sar_approx_weights(40, 0.3);
    CHECK(w.array().square().sum() == doctest::Approx(1.0).epsilon(1e-12));

    double denom = 0.0;
    for (int i = -40; i <= 40; ++i)
        for (int j = -40; j <= 40; ++j)
            denom += std::pow(0.3, 2.0 * std::sqrt(double(i) * i + double(j) * j));
    CHECK(w(40, 40) == doctest::Approx(1.0 / std::sqrt(denom)).epsilon(1e-12));

    CHECK_THROWS_AS(sar_approx_weights(10, 0.3), InputError);
    CHECK_THROWS_AS(sar_approx_weights(40, 0.0), InvalidRho);
    CHECK_THROWS_AS(sar_approx_weights(40, 1.0), InvalidRho);
}

TEST_CASE("gen_dependent: iid falls through to gen_iid") {
    NoiseSpec noise{NoiseDist::StdNormal, 77};
    Grid a = gen_dependent(15, 18, DependenceSpec{}, noise);
    Grid b = gen_iid(15, 18, noise);
    CHECK((a.array() == b.array()).all());
}

TEST_CASE("gen_dependent: SMA(1) variance identity") {
    DependenceSpec dep{DepKind::SMA, 1, 0.5};
    Grid y = gen_dependent(300, 300, dep, {NoiseDist::StdNormal, 21});
    CHECK(sample_variance(y) == doctest::Approx(2.25).epsilon(0.05));
}

TEST_CASE("gen_dependent: SMA(1) autocovariance support") {
    // A radius-1 symmetric window makes the field 2-dependent: the stencil
    // overlap vanishes only once a lag exceeds twice the window radius.
    DependenceSpec dep{DepKind::SMA, 1, 0.5};
    Grid y = gen_dependent(200, 200, dep, {NoiseDist::StdNormal, 22});
    double g0 = empirical_autocov(y, 0, 0);
    double tol = 4.0 / std::sqrt(200.0 * 200.0);
    CHECK(std::abs(empirical_autocov(y, 3, 0)) / g0 < tol * 3);
    CHECK(std::abs(empirical_autocov(y, 0, 3)) / g0 < tol * 3);
    CHECK(std::abs(empirical_autocov(y, 3, 3)) / g0 < tol * 3);

    // Inside the support the autocorrelation matches the overlap ratio.
    Eigen::MatrixXd th = sma_weights(1, 0.5);
    double den = th.array().square().sum();
    auto overlap = [&](int dk, int dl) {
        double num = 0.0;
        for (int k = 0; k + dk < 3; ++k)
            for (int l = 0; l + dl < 3; ++l) num += th(k, l) * th(k + dk, l + dl);
        return num / den;
    };
    CHECK(empirical_autocov(y, 1, 0) / g0 ==
          doctest::Approx(overlap(1, 0)).epsilon(0.15));
    CHECK(empirical_autocov(y, 2, 0) / g0 ==
          doctest::Approx(overlap(2, 0)).epsilon(0.15));
    CHECK(empirical_autocov(y, 2, 2) / g0 ==
          doctest::Approx(overlap(2, 2)).epsilon(0.75));
}

TEST_CASE("gen_field: surface plus noise, degenerate noise hook") {
    BlockPartition p = make_partition(20, 20, 0.6);
    MeanSurface a2{SurfaceKind::A2, 1.5, {}};
    Grid pure = gen_field(20, 20, a2, DependenceSpec{},
                          {NoiseDist::Degenerate, 0}, p);
    Grid surf = eval_mean_surface(a2, 20, 20, p);
    CHECK((pure.array() == surf.array()).all());

    Grid null_field = gen_field(20, 20, MeanSurface{}, DependenceSpec{},
                                {NoiseDist::StdNormal, 31}, p);
    Grid noise_only = gen_iid(20, 20, {NoiseDist::StdNormal, 31});
    CHECK((null_field.array() == noise_only.array()).all());

    Grid shifted = gen_field(100, 100, MeanSurface{SurfaceKind::A2, 2.0, {}},
                             DependenceSpec{}, {NoiseDist::StdNormal, 32},
                             make_partition(100, 100, 0.6));
    double left = shifted.leftCols(50).mean();
    double right = shifted.rightCols(50).mean();
    CHECK(left - right == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("names: noise and dependence round trips") {
    for (NoiseDist d : {NoiseDist::StdNormal, NoiseDist::StudentT3,
                        NoiseDist::ChiSq2Centered, NoiseDist::Degenerate})
        CHECK(noise_from_name(noise_name(d)) == d);
    CHECK_THROWS_AS(noise_from_name("cauchy"), UnknownKind);
}
