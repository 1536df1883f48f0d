#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "itolt/bv2d.hpp"
#include "itolt/harness/builtins.hpp"

using namespace itolt;

namespace {

Surface2D product() {
    return Surface2D::analytic([](double s, double x) { return s * x; }, [](double s, double x) { return s * x; });
}

Surface2D corner_step() {
    return Surface2D::analytic([](double s, double x) { return (s >= 0.5 && x >= 0.5) ? 1.0 : 0.0; }, {},
                               JumpSet{{0.5}, {0.5}});
}

Surface2D sin_sin() {
    auto f = [](double s, double x) { return std::sin(s) * std::sin(x); };
    return Surface2D::analytic(f, f);
}

const Rect kUnit{0.0, 1.0, 0.0, 1.0};

// Nested tanh-sinh quadrature, independent of the library's Gauss-Kronrod.
double oracle_2d(const std::function<double(double, double)>& h, const Rect& r) {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(
        [&](double s) { return ts.integrate([&](double x) { return h(s, x); }, r.x_lo, r.x_hi); }, r.s_lo, r.s_hi);
}

// Every partition whose lines come from `cand` (endpoints always included).
double enumerate_sup(const Surface2D& f, const std::vector<double>& cand) {
    const std::size_t inner = cand.size() - 2;
    double best = 0.0;
    for (unsigned ms = 0; ms < (1u << inner); ++ms) {
        for (unsigned mx = 0; mx < (1u << inner); ++mx) {
            Partition2D p;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const bool keep_s = i == 0 || i + 1 == cand.size() || (ms >> (i - 1) & 1u);
                const bool keep_x = i == 0 || i + 1 == cand.size() || (mx >> (i - 1) & 1u);
                if (keep_s) p.s_points.push_back(cand[i]);
                if (keep_x) p.x_points.push_back(cand[i]);
            }
            best = std::max(best, variation_on(f, p));
        }
    }
    return best;
}

}  // namespace

TEST(RectIncrement, ProductIsAreaOfRectangle) { EXPECT_NEAR(rect_increment(product(), kUnit), 1.0, 1e-15); }

TEST(RectIncrement, FunctionOfTimeOnlyGivesZero) {
    auto g = Surface2D::analytic([](double s, double) { return std::exp(3.0 * s) - s * s; });
    EXPECT_EQ(rect_increment(g, {0.1, 0.9, -2.0, 5.0}), 0.0);
}

TEST(RectIncrement, CornerStepHasUnitMass) {
    // brute force over the four corners with the diagonal left limit
    const auto f = corner_step();
    const double h = Surface2D::kDefaultLeftStep;
    auto raw = [](double s, double x) { return (s >= 0.5 && x >= 0.5) ? 1.0 : 0.0; };
    const double expect = raw(1 - h, 1 - h) - raw(1 - h, 0 - h) - raw(0 - h, 1 - h) + raw(0 - h, 0 - h);
    EXPECT_EQ(rect_increment(f, kUnit), expect);
    EXPECT_EQ(expect, 1.0);
}

TEST(RectIncrement, RejectsInvertedRect) { EXPECT_THROW(rect_increment(product(), {1.0, 0.0, 0.0, 1.0}), std::invalid_argument); }

TEST(RectIncrement, AdditiveOverAnyGrid) {
    const auto f = sin_sin();
    const Rect r{0.2, 1.7, -0.4, 2.2};
    const auto p = Partition2D::uniform(r, 7, 11);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < p.s_points.size(); ++i) {
        for (std::size_t j = 0; j + 1 < p.x_points.size(); ++j) {
            sum += rect_increment(f, {p.s_points[i], p.s_points[i + 1], p.x_points[j], p.x_points[j + 1]});
        }
    }
    EXPECT_NEAR(sum, rect_increment(f, r), 1e-14);
}

TEST(Variation, ProductOnUnitSquareIsOne) {
    const auto v = variation(product(), kUnit);
    EXPECT_TRUE(v.converged);
    EXPECT_NEAR(v.value, 1.0, 1e-12);
}

TEST(Variation, CornerStepMatchesEnumerationOracle) {
    const auto f = corner_step();
    const double oracle = enumerate_sup(f, {0.0, 0.25, 0.5, 0.75, 1.0});
    EXPECT_EQ(oracle, 1.0);
    const auto v = variation(f, kUnit);
    EXPECT_TRUE(v.converged);
    EXPECT_EQ(v.value, oracle);
}

TEST(Variation, FunctionOfSpaceOnlyHasZeroVariation) {
    auto b = Surface2D::analytic([](double, double x) { return std::floor(3.0 * x) + std::sin(7.0 * x); });
    const auto v = variation(b, {0.0, 2.0, -1.0, 1.0});
    EXPECT_TRUE(v.converged);
    EXPECT_EQ(v.value, 0.0);
    // the sectional variation is a separate quantity and is not zero
    const auto sv = sectional_variation(b, 0.5, -1.0, 1.0, {1e-6});
    EXPECT_GT(sv.value, 6.0);
}

TEST(Variation, ReportsNonConvergenceWhenBudgetIsExhausted) {
    RefinementPolicy p;
    p.max_cells = 1u << 8;
    const auto v = variation(builtins::paper_example_1().grad_left_v.value(), {0.0, 2.0, 0.0, 2.0}, p);
    EXPECT_FALSE(v.converged);
    EXPECT_GT(v.value, 0.0);
}

TEST(Variation, DefaultToleranceDependsOnSurfaceKind) {
    EXPECT_EQ(product().default_tolerance(), 1e-8);
    const auto g = Surface2D::sampled({{0.0, 1.0}, {0.0, 1.0}, {0.0, 0.0, 0.0, 1.0}});
    EXPECT_EQ(g.default_tolerance(), 1e-4);
}

TEST(Variation, RefinementTraceNeverDecreases) {
    const std::vector<Surface2D> family{product(), corner_step(), sin_sin(), builtins::paper_example_1().grad_left_v.value(),
                                        builtins::paper_example_2().grad_left_v.value()};
    for (const auto& f : family) {
        RefinementPolicy p;
        p.max_cells = 1u << 16;
        const auto v = variation(f, {0.0, 2.0, 0.0, 2.0}, p);
        for (std::size_t i = 1; i < v.refinement_trace.size(); ++i) {
            EXPECT_GE(v.refinement_trace[i].second, v.refinement_trace[i - 1].second - 1e-12);
        }
    }
}

TEST(Variation, RefinementNeverDecreasesOnNestedPartitions) {
    // P' adds points to P; V_P <= V_P' for arbitrary (non-dyadic) additions
    const auto f = builtins::paper_example_1().grad_left_v.value();
    Partition2D p{{0.0, 0.7, 1.3, 2.0}, {0.0, 0.4, 1.1, 2.0}};
    double prev = variation_on(f, p);
    const double extra[] = {0.33, 1.0, 1.77, 0.05, 1.5};
    for (double e : extra) {
        p.s_points.push_back(e);
        p.x_points.push_back(e + 0.01);
        std::sort(p.s_points.begin(), p.s_points.end());
        std::sort(p.x_points.begin(), p.x_points.end());
        const double cur = variation_on(f, p);
        EXPECT_GE(cur, prev - 1e-12);
        prev = cur;
    }
}

TEST(Additivity, SplitAlongAlignedLine) {
    const auto f = builtins::paper_example_1().grad_left_v.value();
    const VariationGrid vg(f, Partition2D::dyadic({0.0, 2.0, 0.0, 2.0}, 7, f.jumps()));
    const std::size_t ns = vg.s_cells(), nx = vg.x_cells();
    for (std::size_t j1 : {nx / 4, nx / 2, 3 * nx / 4}) {
        EXPECT_NEAR(vg.over(0, ns / 2, 0, nx), vg.over(0, ns / 2, 0, j1) + vg.over(0, ns / 2, j1, nx), 1e-12);
    }
}

TEST(Additivity, FourRectangleIdentity) {
    const std::vector<Surface2D> family{product(), corner_step(), builtins::paper_example_1().grad_left_v.value()};
    for (const auto& f : family) {
        const VariationGrid vg(f, Partition2D::dyadic({0.0, 2.0, 0.0, 2.0}, 6, f.jumps()));
        const std::size_t ns = vg.s_cells(), nx = vg.x_cells();
        for (std::size_t i1 : {ns / 3, ns / 2}) {
            for (std::size_t j1 : {nx / 5, nx / 2}) {
                const double whole = vg.over(0, ns, 0, nx);
                const double parts = vg.over(0, i1, 0, j1) + vg.over(i1, ns, 0, j1) + vg.over(0, i1, j1, nx) +
                                     vg.over(i1, ns, j1, nx);
                EXPECT_NEAR(whole, parts, 1e-12);
            }
        }
    }
}

namespace {

void expect_jordan(const Surface2D& f, const Rect& r) {
    const auto jp = jordan_decompose(f, r.s_lo, r.x_lo, r);
    EXPECT_GE(min_cell_increment(jp.f1_nodes, jp.grid), kNegativeIncrementGuard);
    EXPECT_GE(min_cell_increment(jp.f2_nodes, jp.grid), kNegativeIncrementGuard);
    for (std::size_t k = 0; k < jp.f_nodes.size(); ++k) {
        EXPECT_NEAR(jp.f1_nodes[k] - jp.f2_nodes[k], jp.f_nodes[k], 1e-12);
    }
}

}  // namespace

TEST(Jordan, IncreasingPartsAndExactReconstruction) {
    expect_jordan(product(), kUnit);
    expect_jordan(corner_step(), kUnit);
    expect_jordan(builtins::paper_example_1().grad_left_v.value(), {0.0, 2.0, 0.0, 2.0});
    expect_jordan(Surface2D::analytic([](double s, double x) { return (s > 0.3 ? 1.0 : 0.0) - (x > 0.6 ? 2.0 : 0.0) * s; },
                                      {}, JumpSet{{0.3}, {0.6}}),
                  kUnit);
}

TEST(Jordan, ProductIsItsOwnIncreasingPart) {
    const auto jp = jordan_decompose(product(), 0.0, 0.0, kUnit);
    // V_f([0,s]x[0,x]) = s x, so f1 = s x and f2 = 0 on the grid
    for (std::size_t k = 0; k < jp.f_nodes.size(); ++k) {
        EXPECT_NEAR(jp.f1_nodes[k], jp.f_nodes[k], 1e-12);
        EXPECT_NEAR(jp.f2_nodes[k], 0.0, 1e-12);
    }
}

TEST(Jordan, NegatedProductMovesIncrementsToSecondPart) {
    auto neg = Surface2D::analytic([](double s, double x) { return -s * x; }, [](double s, double x) { return -s * x; });
    const auto jp = jordan_decompose(neg, 0.0, 0.0, kUnit);
    const auto pos = jordan_decompose(product(), 0.0, 0.0, kUnit);
    const VariationGrid g1(jp.f1_nodes, jp.grid), g2(jp.f2_nodes, jp.grid), gp(pos.f_nodes, pos.grid);
    for (std::size_t i = 0; i < g1.s_cells(); ++i) {
        for (std::size_t j = 0; j < g1.x_cells(); ++j) {
            EXPECT_NEAR(g1.increment(i, j), 0.0, 1e-12);
            EXPECT_NEAR(g2.increment(i, j), gp.increment(i, j), 1e-12);
        }
    }
}

TEST(Jordan, ZeroSurface) {
    const auto jp = jordan_decompose(Surface2D{}, 0.0, 0.0, kUnit);
    for (std::size_t k = 0; k < jp.f_nodes.size(); ++k) {
        EXPECT_EQ(jp.f1_nodes[k], 0.0);
        EXPECT_EQ(jp.f2_nodes[k], 0.0);
    }
    EXPECT_EQ(jp.f1.eval(0.5, 0.5), 0.0);
}

TEST(Jordan, RejectsRectangleOutsideQuarterSpace) {
    EXPECT_THROW(jordan_decompose(product(), 0.5, 0.0, kUnit), std::invalid_argument);
}

TEST(LsIntegral2D, ConstantIntegrandGivesTotalMass) {
    const auto r = ls_integral_2d([](double, double) { return 1.0; }, product(), kUnit);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(LsIntegral2D, LinearIntegrandAgainstProduct) {
    const auto r = ls_integral_2d([](double s, double x) { return s + x; }, product(), kUnit);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-8);
}

TEST(LsIntegral2D, AtomAtCorner) {
    const auto r = ls_integral_2d([](double, double) { return 1.0; }, corner_step(), kUnit);
    EXPECT_NEAR(r.value, 1.0, 1e-15);
    const auto g = ls_integral_2d([](double s, double x) { return 3.0 + s * x; }, corner_step(), kUnit);
    EXPECT_NEAR(g.value, 3.25, 1e-12);
}

TEST(LsIntegral2D, SmoothDensityOracle) {
    struct Case {
        Surface2D f;
        std::function<double(double, double)> density;
    };
    const std::vector<Case> cases{
        {product(), [](double, double) { return 1.0; }},
        {sin_sin(), [](double s, double x) { return std::cos(s) * std::cos(x); }},
    };
    const std::vector<std::function<double(double, double)>> integrands{
        [](double s, double x) { return 1.0 + s * s * x; },
        [](double s, double x) { return s * s * s - 2.0 * x * x + s * x; },
        [](double s, double x) { return (s - 0.3) * (x + 0.7) * (x - 1.1); },
    };
    const Rect r{0.0, 1.5, -0.5, 1.0};
    for (const auto& c : cases) {
        for (const auto& g : integrands) {
            const double want = oracle_2d([&](double s, double x) { return g(s, x) * c.density(s, x); }, r);
            const auto got = ls_integral_2d(g, c.f, r);
            EXPECT_TRUE(got.converged);
            EXPECT_NEAR(got.value, want, 1e-6 * std::abs(want));
        }
    }
}

TEST(LsSum2D, LowerLeftCornerConvention) {
    // the atom at (1/2, 1/2) is charged to the cell whose lower-left corner is (1/2, 1/2)
    const Partition2D p{{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}};
    const double v = ls_sum_2d([](double s, double x) { return s == 0.5 && x == 0.5 ? 7.0 : 0.0; }, corner_step(), p);
    EXPECT_EQ(v, 7.0);
}

TEST(LsIntegral1D, Identity) {
    BvFunction1D h{[](double x) { return x; }, [](double x) { return x; }, {}};
    const auto r = ls_integral_1d([](double x) { return x; }, h, 0.0, 1.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 0.5, 1e-10);
}

TEST(LsIntegral1D, SingleAtom) {
    const double J = 2.5, c = -1.75, x0 = 0.375;
    BvFunction1D h{[=](double x) { return x > x0 ? J : 0.0; }, [=](double x) { return x > x0 ? J : 0.0; }, {x0}};
    const auto r = ls_integral_1d([=](double) { return c; }, h, 0.0, 1.0);
    EXPECT_NEAR(r.value, c * J, 1e-14);
}

TEST(LsIntegral1D, LeftSignChargesTwiceTheValueAtZero) {
    // cadlag step data against sgn-: the atom of mass 2 at 0 picks g(0)
    auto g = [](double x) { return x < 0.0 ? 0.8 : (x < 0.4 ? 0.3 : 0.1); };
    BvFunction1D h{[](double x) { return x > 0.0 ? 1.0 : -1.0; }, [](double x) { return x > 0.0 ? 1.0 : -1.0; }, {0.0}};
    const auto r = ls_integral_1d(g, h, -1.0, 1.0);
    EXPECT_NEAR(r.value, 2.0 * g(0.0), 1e-14);
}

TEST(Partition2D, DyadicIncludesJumpLines) {
    const auto p = Partition2D::dyadic(kUnit, 2, JumpSet{{0.3}, {0.6, 7.0}});
    EXPECT_EQ(p.s_points.size(), 6u);
    EXPECT_EQ(p.x_points.size(), 6u);
    EXPECT_NO_THROW(p.validate());
    EXPECT_THROW((Partition2D{{0.0, 0.0}, {0.0, 1.0}}.validate()), std::invalid_argument);
}

TEST(Surface2D, GridSampledIsLeftContinuousStep) {
    const auto g = Surface2D::sampled({{0.0, 1.0, 2.0}, {0.0, 1.0}, {1, 2, 3, 4, 5, 6}});
    EXPECT_EQ(g.eval(1.0, 1.0), 4.0);
    EXPECT_EQ(g.eval(0.5, 0.5), 4.0);
    EXPECT_EQ(g.eval(1.5, 0.2), 6.0);
    EXPECT_EQ(g.eval_left(1.0, 1.0), g.eval(1.0, 1.0));
    EXPECT_EQ(g.kind(), SurfaceKind::grid_sampled);
}

TEST(Surface2D, DiagonalLeftLimitMatchesContinuousValue) {
    auto f = Surface2D::analytic([](double s, double x) { return std::exp(s) * std::cos(x); });
    EXPECT_NEAR(f.eval_left(0.4, 0.9), f.eval(0.4, 0.9), 1e-8);
}
