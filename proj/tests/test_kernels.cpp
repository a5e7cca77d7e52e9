#include <doctest.h>

#include <cstring>

#include "lanekit/kernels.hpp"
#include "lanekit/synth.hpp"

using namespace lanekit;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("pairwise sum is deterministic and exact on integers") {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 13);
    double expect = 0.0;
    for (double x : v) expect += x;  // integer-valued, exact either way
    CHECK(kernels::pairwise_sum(v) == expect);
}

TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
    const kernels::Ops* avx2 = kernels::avx2_ops();
    if (avx2 == nullptr) {
        MESSAGE("avx2 unavailable; skipping equivalence checks");
        return;
    }
    const kernels::Ops& scalar = kernels::scalar_ops();
    Rng rng(71);

    SUBCASE("splat_max_row") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 300));
            std::vector<double> gx(n), a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                gx[i] = rng.uniform(0.0, 1.0);
                a[i] = b[i] = rng.uniform(0.0, 1.0);
            }
            const double gy = rng.uniform(0.0, 1.0);
            scalar.splat_max_row(a.data(), gx.data(), gy, n);
            avx2->splat_max_row(b.data(), gx.data(), gy, n);
            CHECK(bitwise_equal(a, b));
        }
    }

    SUBCASE("masked_abs_diff") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 300));
            std::vector<double> pred(n), target(n), mask(n);
            for (std::size_t i = 0; i < n; ++i) {
                pred[i] = rng.uniform(-3, 3);
                target[i] = rng.bernoulli(0.1) ? pred[i] : rng.uniform(-3, 3);  // exercise d == 0
                mask[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            }
            std::vector<double> ca(n), ga(n), cb(n), gb(n);
            scalar.masked_abs_diff(pred.data(), target.data(), mask.data(), 0.125, ca.data(), ga.data(), n);
            avx2->masked_abs_diff(pred.data(), target.data(), mask.data(), 0.125, cb.data(), gb.data(), n);
            CHECK(bitwise_equal(ca, cb));
            CHECK(bitwise_equal(ga, gb));
        }
    }

    SUBCASE("nearest_center") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 200));
            const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform(0, 9));
            std::vector<double> vx(n), vy(n), cx(m), cy(m);
            for (std::size_t i = 0; i < n; ++i) {
                vx[i] = rng.uniform(0, 100);
                vy[i] = rng.uniform(0, 40);
            }
            for (std::size_t j = 0; j < m; ++j) {
                cx[j] = rng.uniform(0, 100);
                cy[j] = rng.uniform(0, 40);
            }
            std::vector<std::int32_t> ba(n), bb(n);
            std::vector<double> da(n), db(n);
            scalar.nearest_center(vx.data(), vy.data(), n, cx.data(), cy.data(), m, ba.data(), da.data());
            avx2->nearest_center(vx.data(), vy.data(), n, cx.data(), cy.data(), m, bb.data(), db.data());
            CHECK(ba == bb);
            CHECK(bitwise_equal(da, db));
        }
    }

    SUBCASE("nearest_center tie goes to the smaller index in both variants") {
        std::vector<double> vx(8, 5.0), vy(8, 5.0), cx{4.0, 6.0}, cy{5.0, 5.0};  // equidistant centers
        std::vector<std::int32_t> ba(8), bb(8);
        std::vector<double> da(8), db(8);
        scalar.nearest_center(vx.data(), vy.data(), 8, cx.data(), cy.data(), 2, ba.data(), da.data());
        avx2->nearest_center(vx.data(), vy.data(), 8, cx.data(), cy.data(), 2, bb.data(), db.data());
        for (std::int32_t b : ba) CHECK(b == 0);
        CHECK(ba == bb);
    }

    SUBCASE("bilinear_accum") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t channels = 1 + static_cast<std::size_t>(rng.uniform(0, 12));
            const std::size_t plane = 64;
            std::vector<double> data(channels * plane);
            for (double& v : data) v = rng.uniform(-2, 2);
            const std::size_t o00 = 9, o10 = 10, o01 = 17, o11 = 18;
            const double fx = rng.uniform(0, 1), fy = rng.uniform(0, 1);
            std::vector<double> acc_a(channels, 0.5), acc_b(channels, 0.5);
            scalar.bilinear_accum(data.data(), plane, channels, o00, o10, o01, o11, (1 - fx) * (1 - fy),
                                  fx * (1 - fy), (1 - fx) * fy, fx * fy, 1.25, acc_a.data());
            avx2->bilinear_accum(data.data(), plane, channels, o00, o10, o01, o11, (1 - fx) * (1 - fy),
                                 fx * (1 - fy), (1 - fx) * fy, fx * fy, 1.25, acc_b.data());
            CHECK(bitwise_equal(acc_a, acc_b));
        }
    }
}

TEST_CASE("backend forcing") {
    CHECK_NOTHROW(kernels::set_backend(kernels::Backend::Scalar));
    CHECK(kernels::backend_name() == "scalar");
    kernels::set_backend(kernels::Backend::Auto);
    if (kernels::avx2_ops() != nullptr) {
        kernels::set_backend(kernels::Backend::Avx2);
        CHECK(kernels::backend_name() == "avx2");
        kernels::set_backend(kernels::Backend::Auto);
    }
}
