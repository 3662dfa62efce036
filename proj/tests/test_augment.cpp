#include <doctest.h>

#include "helpers.hpp"
#include "swd/augment.hpp"

using namespace swd;

TEST_SUITE("augment") {

TEST_CASE("scaling multiplies elementwise") {
    Eigen::ArrayXd x(2);
    x << 1.0, -2.0;
    const Eigen::ArrayXd y = apply_scale(x, 2.0);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == -4.0);
    CHECK((apply_scale(x, 1.0) == x).all());
}

TEST_CASE("scaling preserves the argmax of the magnitude") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::ArrayXd x(64);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-2.0, 2.0);
        const double alpha = rng.uniform(0.01, 10.0);
        Eigen::Index i_before, i_after;
        x.abs().maxCoeff(&i_before);
        apply_scale(x, alpha).abs().maxCoeff(&i_after);
        CHECK(i_before == i_after);
    }
}

TEST_CASE("zero sigma noise is the identity") {
    Eigen::ArrayXd x(5);
    x << 1, 2, 3, 4, 5;
    Rng rng(0);
    CHECK((apply_noise(x, 0.0, rng) == x).all());
}

TEST_CASE("noise sample standard deviation matches sigma") {
    Eigen::ArrayXd zeros = Eigen::ArrayXd::Zero(1000000);
    Rng rng(42);
    const Eigen::ArrayXd y = apply_noise(zeros, 0.01, rng);
    const double mean = y.mean();
    const double sd = std::sqrt((y - mean).square().sum() / static_cast<double>(y.size() - 1));
    CHECK(sd >= 0.0099);
    CHECK(sd <= 0.0101);
}

TEST_CASE("fixed seed gives bit-identical noise") {
    Eigen::ArrayXd x(100);
    x.setZero();
    Rng a(123), b(123);
    const Eigen::ArrayXd ya = apply_noise(x, 0.5, a);
    const Eigen::ArrayXd yb = apply_noise(x, 0.5, b);
    for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(ya[i] == yb[i]);
}

TEST_CASE("inversion negates and is an involution") {
    Eigen::ArrayXd x(3);
    x << 1.0, -1.0, 0.0;
    const Eigen::ArrayXd y = apply_invert(x);
    CHECK(y[0] == -1.0);
    CHECK(y[1] == 1.0);
    CHECK(y[2] == 0.0);
    CHECK((apply_invert(y) == x).all());

    Rng rng(4);
    Eigen::ArrayXd z(32);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.uniform(-1.0, 1.0);
    CHECK(apply_invert(z).mean() == doctest::Approx(-z.mean()).epsilon(1e-12));
}

TEST_CASE("pipeline with zero probabilities is the identity") {
    AugmentConfig cfg;
    cfg.p_scale = cfg.p_noise = cfg.p_invert = 0.0;
    Eigen::ArrayXf x(4);
    x << 1.f, -2.f, 0.5f, 3.f;
    Rng rng(7);
    CHECK((apply_pipeline(x, cfg, rng) == x).all());
}

TEST_CASE("pipeline with only inversion flips the sign") {
    AugmentConfig cfg;
    cfg.p_scale = cfg.p_noise = 0.0;
    cfg.p_invert = 1.0;
    Eigen::ArrayXf x(3);
    x << 1.f, -2.f, 4.f;
    Rng rng(7);
    CHECK((apply_pipeline(x, cfg, rng) == -x).all());
}

TEST_CASE("inversion fires at its configured frequency") {
    AugmentConfig cfg;  // p_invert = 0.2
    Eigen::ArrayXf x(8);
    x.setConstant(1.0f);
    int inverted = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::derive(99, static_cast<uint64_t>(t));
        const Eigen::ArrayXf y = apply_pipeline(x, cfg, rng);
        if (y[0] < 0.0f) ++inverted;
    }
    const double freq = static_cast<double>(inverted) / trials;
    CHECK(freq >= 0.19);
    CHECK(freq <= 0.21);
}

TEST_CASE("pipeline output length always matches the input") {
    AugmentConfig cfg;
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(300));
        Eigen::ArrayXf x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        CHECK(apply_pipeline(x, cfg, rng).size() == n);
    }
}

TEST_CASE("without noise every output is a signed scaling of the input") {
    AugmentConfig cfg;
    cfg.p_noise = 0.0;
    Eigen::ArrayXf x(16);
    Rng init(3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = static_cast<float>(init.uniform(0.5, 1.5));
    for (int t = 0; t < 200; ++t) {
        Rng rng = Rng::derive(5, static_cast<uint64_t>(t));
        const Eigen::ArrayXf y = apply_pipeline(x, cfg, rng);
        const float ratio = y[0] / x[0];
        CHECK(std::abs(ratio) >= cfg.scale_min * 0.999f);
        CHECK(std::abs(ratio) <= cfg.scale_max * 1.001f);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            CHECK(y[i] == doctest::Approx(ratio * x[i]).epsilon(1e-6));
    }
}

TEST_CASE("identical seeds determine the output completely") {
    AugmentConfig cfg;
    Eigen::ArrayXf x(64);
    Rng init(8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = static_cast<float>(init.uniform(-1.0, 1.0));
    for (int t = 0; t < 20; ++t) {
        Rng a = Rng::derive(1000, static_cast<uint64_t>(t));
        Rng b = Rng::derive(1000, static_cast<uint64_t>(t));
        const Eigen::ArrayXf ya = apply_pipeline(x, cfg, a);
        const Eigen::ArrayXf yb = apply_pipeline(x, cfg, b);
        for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(ya[i] == yb[i]);
    }
}

}  // TEST_SUITE
