#include "chfe/campaigns.hpp"
#include "chfe/errors.hpp"
#include "chfe/parallel.hpp"

#include <doctest.h>

#include <atomic>

using namespace chfe;

namespace {

bool same(const std::vector<CaseResult>& a, const std::vector<CaseResult>& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].case_id != b[i].case_id || a[i].lhs != b[i].lhs || a[i].rhs != b[i].rhs || a[i].passed != b[i].passed)
            return false;
    return true;
}

} // namespace

TEST_CASE("counter rng is a pure function of seed, stream and counter")
{
    CounterRng a(5, 2), b(5, 2), c(5, 3);
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    CHECK(CounterRng(5, 2).at(7) == a.at(7));
    double s = 0.0;
    CounterRng u(1);
    for (int i = 0; i < 100000; ++i) s += u.uniform();
    CHECK(s / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("parallel_for visits every index once and rethrows")
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw ParameterError("x"); }), ParameterError);
}

TEST_CASE("campaign results do not depend on the thread count")
{
    CampaignOptions one, many;
    many.threads = 4;
    CHECK(same(carlson_levin_campaign(30, one), carlson_levin_campaign(30, many)));
    CHECK(same(general_cl_campaign(10, one), general_cl_campaign(10, many)));
    CHECK(same(convexity_campaign(8, one, {200, true, 1e-9}), convexity_campaign(8, many, {200, true, 1e-9})));
    CHECK(same(sandwich_campaign(20, one), sandwich_campaign(20, many)));
}

TEST_CASE("different seeds give different cases")
{
    CampaignOptions a, b;
    b.seed = 2;
    CHECK_FALSE(same(carlson_levin_campaign(5, a), carlson_levin_campaign(5, b)));
}

TEST_CASE("fixed campaign parameters are validated")
{
    CampaignOptions o;
    o.dim = 3;
    o.q = 0.5;
    o.lambda = 1.5; // threshold is 2
    CHECK_THROWS_AS(validate_campaign_options(o), ParameterError);
    o.lambda = 2.5;
    CHECK_NOTHROW(validate_campaign_options(o));
    o.q = 1.0;
    CHECK_THROWS_AS(validate_campaign_options(o), ParameterError);
}

TEST_CASE("random densities are normalized and compact")
{
    const ModelManifold m = ModelManifold::constant(3, 1.0);
    for (std::uint64_t k = 0; k < 20; ++k) {
        CounterRng rng(1, k);
        const RadialDensity rho = random_radial_density(m, rng);
        CHECK(rho.compact_support);
        CHECK(mass(rho) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rho.r_max() <= 7.0);
        for (double v : rho.rho) CHECK(v >= 0.0);
    }
}

TEST_CASE("q and lambda draws respect the threshold")
{
    CampaignOptions o;
    for (std::uint64_t k = 0; k < 200; ++k) {
        CounterRng rng(3, k);
        const auto [q, lambda] = random_q_lambda(4, rng, o);
        CHECK(q >= 0.2);
        CHECK(q <= 0.9);
        CHECK(lambda > lambda_threshold(4, q));
    }
}

TEST_CASE("uncentred convexity control fails somewhere")
{
    CampaignOptions o;
    const auto r = convexity_campaign(20, o, {200, false, 1e-9});
    CHECK_FALSE(all_passed(r));
}
