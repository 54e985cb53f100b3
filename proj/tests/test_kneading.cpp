#include <gtest/gtest.h>

#include <polardyn/classify.hpp>

#include "probes.hpp"

using namespace polardyn;
using Digits = std::vector<int>;

TEST(Allowable, Examples) {
    EXPECT_TRUE(is_allowable({}));
    EXPECT_FALSE(is_allowable({0}));
    EXPECT_FALSE(is_allowable({0, 0, 0, 0}));
    EXPECT_FALSE(is_allowable({0, 3, 0}));
    EXPECT_FALSE(is_allowable({0, -1, 0, 2, 0}));
    EXPECT_TRUE(is_allowable({-2, -1}));
    EXPECT_TRUE(is_allowable({0, 3}));
    EXPECT_TRUE(is_allowable({1, 3, 0}));
    EXPECT_TRUE(is_allowable({0, 0, 2, 0}));
}

TEST(ClassifySequence, Examples) {
    EXPECT_EQ(classify_sequence({}), SequenceType::star);
    EXPECT_EQ(classify_sequence({-1}), SequenceType::regular);
    EXPECT_EQ(classify_sequence({-2, -1}), SequenceType::regular);
    EXPECT_EQ(classify_sequence({0, 0, 2}), SequenceType::regular);
    EXPECT_EQ(classify_sequence({1, 0}), SequenceType::unipolar);
    EXPECT_EQ(classify_sequence({0, 0, 2, 0}), SequenceType::unipolar);
    EXPECT_EQ(classify_sequence({3, 0, -1, 0}), SequenceType::unipolar);
    EXPECT_EQ(classify_sequence({1, 1, 1, 0}), SequenceType::hybrid);
    EXPECT_EQ(classify_sequence({-2, -1, 2, 0}), SequenceType::hybrid);
    EXPECT_EQ(classify_sequence({4, 1, 1, 0, 2, 0}), SequenceType::hybrid);
    EXPECT_EQ(classify_sequence({1, -1, 0}), SequenceType::hybrid);
    EXPECT_EQ(classify_sequence({-1, 3, 0}), SequenceType::hybrid);
    EXPECT_EQ(classify_sequence({0, 2, 1, 0, 0, 0}), SequenceType::hybrid);
}

TEST(ClassifySequence, Errors) {
    EXPECT_THROW(classify_sequence({0}), allowability_error);
    EXPECT_THROW(classify_sequence({0, 0, 0, 0}), allowability_error);
    EXPECT_THROW(classify_sequence({1, 0, 1, 0, 0}), kneading_error);
    EXPECT_THROW(classify_sequence({0, 1, 0, 0}), kneading_error);
    EXPECT_THROW(classify_sequence({1, 1, 0, 0}), kneading_error);
    EXPECT_THROW(classify_sequence({0, 3, 0, 0}), kneading_error);
}

TEST(ClassifySequence, ExactlyOneClass) {
    // exhaustive over digits in {-1, 0, 1} up to length 6
    for (int len = 0; len <= 6; ++len) {
        int total = 1;
        for (int i = 0; i < len; ++i) total *= 3;
        for (int code = 0; code < total; ++code) {
            Digits d;
            for (int i = 0, c = code; i < len; ++i, c /= 3) d.push_back(c % 3 - 1);
            if (!is_allowable(d)) {
                EXPECT_THROW(classify_sequence(d), allowability_error);
                continue;
            }
            int classes = (d.empty() ? 1 : 0) + (!d.empty() && d.back() != 0) + detail::is_unipolar(d) +
                          (!d.empty() && d.back() == 0 && detail::is_hybrid(d));
            EXPECT_LE(classes, 1) << join_digits(d);
            if (classes == 1) {
                EXPECT_NO_THROW(classify_sequence(d)) << join_digits(d);
            } else {
                EXPECT_THROW(classify_sequence(d), kneading_error) << join_digits(d);
            }
        }
    }
}

TEST(PrepoleAddress, Shift) {
    PrepoleAddress a{{1, -2, 3}};
    EXPECT_EQ(a.shift(), (PrepoleAddress{{-2, 3}}));
    EXPECT_THROW(PrepoleAddress{{2}}.shift(), kneading_error);
}

TEST(Prepole, OrderOneIsThePole) {
    for (int k : {-2, -1, 1, 3}) EXPECT_EQ(prepole(cplx(1.0, 1.0), PrepoleAddress{{k}}), cplx(0.0, k * pi));
}

TEST(Prepole, ForwardCheck) {
    cplx lam(1.0, 1.0);
    cplx p = prepole(lam, PrepoleAddress{{1, 1}});
    EXPECT_LT(std::abs(eval(lam, p).value() - cplx(0.0, pi)), 1e-8);
    EXPECT_EQ(strip_index(p), 1);
}

TEST(Prepole, ShiftProperty) {
    for (cplx lam : {cplx(1.0, 1.0), cplx(-0.7, 2.2), cplx(0.3, -4.0)}) {
        for (Digits e : {Digits{1, 2, -1}, Digits{-2, 0, 1}, Digits{0, 3, 2}, Digits{2, -1, -3}}) {
            PrepoleAddress a{e};
            cplx p3 = prepole(lam, a), p2 = prepole(lam, a.shift());
            EXPECT_LT(std::abs(eval(lam, p3).value() - p2), 1e-8 * std::max(1.0, std::abs(p2)))
                << lam << " " << join_digits(e);
        }
    }
}

TEST(Prepole, Rejections) {
    EXPECT_THROW(prepole(2.0, PrepoleAddress{{1, 1}}), kneading_error);
    EXPECT_THROW(prepole(cplx(1.0, 1.0), PrepoleAddress{{1, 0}}), kneading_error);
    EXPECT_THROW(prepole(cplx(1.0, 1.0), PrepoleAddress{{}}), kneading_error);
    EXPECT_THROW(prepole(0.0, PrepoleAddress{{1}}), invalid_parameter);
}

TEST(VirtualCycle, OrderOneAddressesArePoles) {
    for (int k : {-3, -2, -1, 1, 2, 3}) {
        cplx lam = solve_virtual_cycle_parameter(PrepoleAddress{{k}}, cplx(0.3, 0.2));
        EXPECT_LT(std::abs(lam - cplx(0.0, k * pi)), 1e-12);
    }
}

TEST(VirtualCycle, ZeroAddressRejected) {
    EXPECT_THROW(solve_virtual_cycle_parameter(PrepoleAddress{{0}}, cplx(0.1, 0.1)), allowability_error);
    EXPECT_THROW(solve_virtual_cycle_parameter(PrepoleAddress{{0, 0, 0}}, cplx(0.1, 0.1)), allowability_error);
}

TEST(VirtualCycle, ZeroSeedRejected) {
    EXPECT_THROW(solve_virtual_cycle_parameter(PrepoleAddress{{1, 1}}, 0.0), invalid_parameter);
}

TEST(VirtualCycle, SolvedParameterClassifiesBack) {
    for (Digits e : {Digits{1, 1}, Digits{-2, -1}, Digits{2, 1}, Digits{-1, 2}}) {
        PrepoleAddress a{e};
        cplx lam = solve_virtual_cycle_parameter(a, virtual_center_seed(a));
        auto g = detail::forward(lam, lam, static_cast<int>(e.size()) - 1, EngineConfig{});
        ASSERT_TRUE(g);
        EXPECT_LT(std::abs(*g - cplx(0.0, e.back() * pi)), 1e-10) << join_digits(e);
        auto pc = classify_parameter(lam);
        ASSERT_EQ(pc.tag(), Tag::virtual_cycle_parameter) << join_digits(e) << " " << lam;
        EXPECT_EQ(pc.virtual_cycle()->address, a);
    }
}

TEST(VirtualCycle, KnownPeriodThreeCenter) {
    // independent check: f_lam(lam) must equal pi i, i.e. lam = pi i (1 - e^{-2 lam})
    PrepoleAddress a{{1, 1}};
    cplx lam = solve_virtual_cycle_parameter(a, virtual_center_seed(a));
    cplx g = lam - cplx(0.0, pi) * (1.0 - std::exp(-2.0 * lam));
    EXPECT_LT(std::abs(g), 1e-12);
    EXPECT_NEAR(lam.real(), 0.6702031038, 1e-9);
    EXPECT_NEAR(lam.imag(), 2.6651795171, 1e-9);
}

TEST(VirtualCycle, ConjugateAddressGivesConjugateCenter) {
    PrepoleAddress a{{1, 1}}, b{{-1, -1}};
    cplx la = solve_virtual_cycle_parameter(a, virtual_center_seed(a));
    cplx lb = solve_virtual_cycle_parameter(b, virtual_center_seed(b));
    EXPECT_LT(std::abs(la - std::conj(lb)), 1e-12);
}

TEST(Strips, MembershipExamples) {
    StripSpec odd{Parity::odd, 1, 10.0, 0.1};
    StripSpec even{Parity::even, 0, 10.0, 0.1};
    EXPECT_TRUE(strip_membership(cplx(12.0, 0.9 * pi), odd));
    EXPECT_FALSE(strip_membership(cplx(12.0, 0.5 * pi), odd));
    EXPECT_TRUE(strip_membership(cplx(12.0, 0.0), even));
    EXPECT_FALSE(strip_membership(cplx(5.0, 0.0), even));
    EXPECT_FALSE(strip_membership(cplx(10.0, 0.0), even));
    StripSpec neg{Parity::odd, -1, 10.0, 0.1};
    EXPECT_TRUE(strip_membership(cplx(12.0, -0.9 * pi), neg));
    EXPECT_FALSE(strip_membership(cplx(12.0, 0.9 * pi), neg));
    StripSpec e2{Parity::even, 2, 10.0, 0.1};
    EXPECT_DOUBLE_EQ(e2.center(), 4 * pi);
    EXPECT_THROW(StripSpec{Parity::odd}.center(), std::invalid_argument);
}

TEST(EscapeCertificate, Examples) {
    StripSpec s{Parity::even, 0, 1.0, 0.1};
    EXPECT_TRUE(escaping_certificate(-1.0, 0, 3, {s}).certified);
    auto two = escaping_certificate(2.0, 0, 3, {StripSpec{Parity::even, 0, 10.0, 0.1}});
    EXPECT_FALSE(two.certified);
    EXPECT_EQ(two.depth, 0);
}

TEST(EscapeCertificate, DeepTowerUsesLogarithms) {
    StripSpec s{Parity::even, 0, 1.0, 0.1};
    auto c = escaping_certificate(-5.0, 0, 8, {s});
    EXPECT_TRUE(c.certified);
    EXPECT_TRUE(c.overflowed);
    EXPECT_GE(c.depth, 3);
}

TEST(EscapeCertificate, AttractingParametersFail) {
    StripSpec s{Parity::even, 0, 0.1, 0.1};
    for (cplx lam : {cplx(2.0, 0.0), cplx(-7.0, -pi / 2), cplx(-0.5, -0.5), cplx(0.532448, 2.60906)})
        EXPECT_FALSE(escaping_certificate(lam, 0, 8, {s}).certified) << lam;
}

TEST(Itinerary, RoundTripOnDetectedCycles) {
    for (cplx lam : {cplx(-0.5, -0.5), cplx(0.532448, 2.60906), cplx(0.404115, -4.83621), cplx(-7.0, -pi / 2)}) {
        auto rep = detect_cycle(lam, 4000, 64);
        ASSERT_TRUE(rep) << lam;
        const auto& cyc = rep->cycle;
        const std::size_t n = cyc.size();
        // when cycle[1] is the omitted value lambda only positions 1..n-1 have a branch index
        const std::size_t first = cyc[1 % n] == lam ? 1 : 0;
        auto m = cyclic_itinerary(lam, cyc, first);
        ASSERT_EQ(m.size(), n - first);
        for (std::size_t j = first; j < n; ++j) {
            cplx back = inverse_branch(lam, cyc[(j + 1) % n], m[j - first]);
            EXPECT_LT(std::abs(back - cyc[j]), 1e-8 * std::max(1.0, std::abs(cyc[j])));
        }
        EXPECT_EQ(branch_itinerary(lam, cyc), Digits(m.begin() + (1 - first), m.end()));
    }
}

TEST(Itinerary, OmittedValueReported) {
    cplx lam(-7.0, -pi / 2);
    auto rep = detect_cycle(lam, 4000, 64);
    ASSERT_TRUE(rep);
    ASSERT_EQ(rep->cycle[1], lam);
    EXPECT_THROW(cyclic_itinerary(lam, rep->cycle), kneading_error);
}

TEST(Kneading, PeriodOneIsStar) {
    auto pc = classify_parameter(2.0);
    ASSERT_EQ(pc.tag(), Tag::attracting);
    ASSERT_TRUE(pc.attracting()->kneading);
    EXPECT_EQ(pc.attracting()->kneading->type, SequenceType::star);
    EXPECT_TRUE(pc.attracting()->kneading->digits.empty());
}

TEST(Kneading, PeriodTwoCalibrationAtPoles) {
    for (int k : {-3, -2, -1, 1, 2, 3}) {
        std::optional<probes::Probe> pr;
        for (double r : {0.1, 0.05, 0.2}) {
            pr = probes::best_on_circle(cplx(0.0, k * pi), r, 2, 72);
            if (pr) break;
        }
        ASSERT_TRUE(pr) << "no period-2 parameter near " << k << " pi i";
        const auto* a = pr->result.attracting();
        ASSERT_TRUE(a->kneading) << a->kneading_failure;
        EXPECT_EQ(a->kneading->digits, Digits{k}) << pr->lambda;
        EXPECT_EQ(a->kneading->type, SequenceType::regular);
    }
}

namespace {

KneadingSequence kneading_at(cplx lam) {
    auto pc = classify_parameter(lam);
    EXPECT_EQ(pc.tag(), Tag::attracting) << lam;
    if (!pc.attracting()) return {};
    EXPECT_TRUE(pc.attracting()->kneading) << pc.attracting()->kneading_failure;
    return pc.attracting()->kneading.value_or(KneadingSequence{});
}

}  // namespace

TEST(Kneading, Anchors) {
    struct Case {
        cplx lam;
        Digits digits;
        SequenceType type;
    };
    const Case cases[] = {
        {{-7.0, -pi / 2}, {1, 0}, SequenceType::unipolar},
        {{-7.0, pi / 2}, {-1, 0}, SequenceType::unipolar},
        {{-0.5, -0.5}, {0, 0, 1, 0}, SequenceType::unipolar},
        {{-2.0, -0.0867}, {0, 0, 2, 0}, SequenceType::unipolar},
        {{0.67524, 2.71248}, {1, 1}, SequenceType::regular},
        {{0.404115, -4.83621}, {-2, -1}, SequenceType::regular},
        {{0.532448, 2.60906}, {1, 1, 1, 0}, SequenceType::hybrid},
        {{0.532448, -2.60906}, {-1, -1, -1, 0}, SequenceType::hybrid},
        {{0.203321, -4.74383}, {-2, -1, 2, 0}, SequenceType::hybrid},
    };
    for (const auto& c : cases) {
        auto ks = kneading_at(c.lam);
        EXPECT_EQ(ks.digits, c.digits) << c.lam;
        EXPECT_EQ(ks.type, c.type) << c.lam;
        EXPECT_TRUE(is_allowable(ks.digits));
    }
}

TEST(Kneading, ConjugateNegatesDigits) {
    for (cplx lam : {cplx(-0.5, -0.5), cplx(0.404115, -4.83621), cplx(-2.0, -0.0867), cplx(0.11933, -4.80062)}) {
        auto a = kneading_at(lam), b = kneading_at(std::conj(lam));
        ASSERT_EQ(a.digits.size(), b.digits.size());
        for (std::size_t i = 0; i < a.digits.size(); ++i) EXPECT_EQ(a.digits[i], -b.digits[i]) << lam;
        EXPECT_EQ(a.type, b.type);
    }
}

TEST(Classify, PrecedenceAndTags) {
    EXPECT_EQ(classify_parameter(cplx(0.0, pi)).tag(), Tag::virtual_cycle_parameter);
    EXPECT_EQ(classify_parameter(cplx(0.0, pi)).virtual_cycle()->address, (PrepoleAddress{{1}}));
    EXPECT_EQ(classify_parameter(-1.0).tag(), Tag::escaping);
    EXPECT_EQ(classify_parameter(2.0).tag(), Tag::attracting);
    EXPECT_THROW(classify_parameter(0.0), invalid_parameter);
}

TEST(Classify, TinyBudgetIsUndetermined) {
    auto pc = classify_parameter(cplx(-0.5, -0.5), 5, 64);
    EXPECT_EQ(pc.tag(), Tag::undetermined);
}
