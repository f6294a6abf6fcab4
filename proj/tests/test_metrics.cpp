#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "flareprox/metrics.hpp"
#include "oracle/oracle.hpp"

using namespace flareprox::metrics;
using flareprox::regions::Box;

namespace {

std::vector<BoundingRegion> boxes(std::initializer_list<Box> list) {
  std::vector<BoundingRegion> out;
  for (const auto& b : list) out.push_back({b, {}});
  return out;
}

ImageEvaluation eval_with(ContingencyCategory c, double ps, double acr) {
  ImageEvaluation e;
  e.category = c;
  e.ps = ps;
  e.acr = acr;
  return e;
}

const CategorySummary& row(const std::vector<CategorySummary>& rows, std::string_view name) {
  for (const auto& r : rows) {
    if (r.category == name) return r;
  }
  throw std::runtime_error("missing row");
}

}  // namespace

TEST_CASE("categorize covers the contingency table") {
  CHECK(categorize(true, true) == ContingencyCategory::TP);
  CHECK(categorize(true, false) == ContingencyCategory::FP);
  CHECK(categorize(false, true) == ContingencyCategory::FN);
  CHECK(categorize(false, false) == ContingencyCategory::TN);
  for (auto c : {ContingencyCategory::TP, ContingencyCategory::FP, ContingencyCategory::TN, ContingencyCategory::FN}) {
    CHECK(parse_category(to_string(c)) == c);
  }
  CHECK_FALSE(parse_category("XX").has_value());
}

TEST_CASE("per_ar_distance") {
  const auto r = boxes({{0, 0, 50, 100}});
  CHECK(per_ar_distance({25, 25}, r) == 0.0);
  CHECK(per_ar_distance({50, 100}, r) == 0.0);
  CHECK(*per_ar_distance({60, 50}, r) == doctest::Approx(10.0));
  CHECK(*per_ar_distance({53, 104}, r) == doctest::Approx(5.0));
  CHECK_FALSE(per_ar_distance({1, 1}, std::vector<BoundingRegion>{}).has_value());
  const auto two = boxes({{0, 0, 10, 10}, {100, 0, 110, 10}});
  CHECK(*per_ar_distance({95, 5}, two) == doctest::Approx(5.0));
}

TEST_CASE("proximity score and colocation ratio examples") {
  const auto r = boxes({{0, 0, 10, 10}});
  const std::vector<PixelPoint> inside{{1, 1}, {10, 10}};
  CHECK(*proximity_score(inside, r) == 0.0);
  CHECK(*attribution_colocation_ratio(inside, r) == 1.0);

  const std::vector<PixelPoint> mixed{{5, 5}, {17, 5}};
  CHECK(*proximity_score(mixed, r) == doctest::Approx(3.5));
  CHECK(*attribution_colocation_ratio(mixed, r) == 0.5);
  CHECK(as_percent(0.5) == 50.0);

  const std::vector<PixelPoint> outside{{20, 5}, {5, 30}};
  CHECK(*attribution_colocation_ratio(outside, r) == 0.0);

  CHECK_FALSE(proximity_score(std::vector<PixelPoint>{}, r).has_value());
  CHECK_FALSE(attribution_colocation_ratio(std::vector<PixelPoint>{}, r).has_value());
  CHECK_FALSE(proximity_score(inside, std::vector<BoundingRegion>{}).has_value());
  CHECK(*attribution_colocation_ratio(inside, std::vector<BoundingRegion>{}) == 0.0);
}

TEST_CASE("evaluate_image raises flags and withholds metrics") {
  const auto r = boxes({{0, 0, 10, 10}});
  const std::vector<ArInput> ars{{11111, {5, 5}}, {22222, {17, 5}}};
  auto e = evaluate_image("a", ContingencyCategory::TP, ars, r);
  CHECK_FALSE(e.flagged());
  CHECK(*e.ps == doctest::Approx(3.5));
  CHECK(*e.acr == 0.5);
  REQUIRE(e.per_ar_distances.size() == 2);
  CHECK(e.per_ar_distances[0].inside);
  CHECK(e.per_ar_distances[1].noaa_ar == 22222);
  CHECK(e.region_count == 1);

  e = evaluate_image("b", ContingencyCategory::FP, ars, std::vector<BoundingRegion>{});
  CHECK(e.no_regions);
  CHECK_FALSE(e.ps.has_value());
  CHECK_FALSE(e.acr.has_value());

  e = evaluate_image("c", ContingencyCategory::TN, std::vector<ArInput>{}, r);
  CHECK(e.no_ars);
  CHECK_FALSE(e.ps.has_value());
  CHECK_FALSE(e.acr.has_value());
}

TEST_CASE("mean_std is the population statistic") {
  const std::vector<double> one{10};
  CHECK(mean_std(one)->mean == 10);
  CHECK(mean_std(one)->stddev == 0);
  const std::vector<double> two{2, 4};
  CHECK(mean_std(two)->mean == 3);
  CHECK(mean_std(two)->stddev == 1);
  CHECK_FALSE(mean_std(std::vector<double>{}).has_value());
}

TEST_CASE("mean_std agrees with a long double reference") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> v(0.0, 300.0);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> xs(1 + k % 97);
    for (auto& x : xs) x = v(rng);
    const auto got = mean_std(xs);
    const auto [m, s] = flareprox::oracle::reference_mean_std(xs);
    CHECK(std::abs(got->mean - static_cast<double>(m)) <= 1e-9);
    CHECK(std::abs(got->stddev - static_cast<double>(s)) <= 1e-9);
  }
}

TEST_CASE("summarize groups by category and leaves flagged images out of the means") {
  std::vector<ImageEvaluation> evals{eval_with(ContingencyCategory::TP, 2, 1.0),
                                     eval_with(ContingencyCategory::TP, 4, 0.5),
                                     eval_with(ContingencyCategory::FN, 10, 0.0)};
  ImageEvaluation blank;
  blank.category = ContingencyCategory::TP;
  blank.no_regions = true;
  evals.push_back(blank);
  ImageEvaluation empty;
  empty.category = ContingencyCategory::FP;
  empty.no_ars = true;
  evals.push_back(empty);

  const auto rows = summarize(evals);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].category == "FN");
  CHECK(rows[1].category == "FP");
  CHECK(rows[2].category == "TN");
  CHECK(rows[3].category == "TP");
  CHECK(rows[4].category == "overall");

  const auto& tp = row(rows, "TP");
  CHECK(tp.n == 2);
  CHECK(tp.n_no_regions == 1);
  CHECK(*tp.mean_ps == 3);
  CHECK(*tp.std_ps == 1);
  CHECK(*tp.mean_acr == 0.75);
  CHECK(*tp.std_acr == 0.25);

  const auto& fp = row(rows, "FP");
  CHECK(fp.n == 0);
  CHECK(fp.n_no_ars == 1);
  CHECK_FALSE(fp.mean_ps.has_value());
  CHECK_FALSE(fp.std_acr.has_value());

  const auto& all = row(rows, "overall");
  CHECK(all.n == 3);
  CHECK(all.n_no_regions == 1);
  CHECK(all.n_no_ars == 1);
  CHECK(*all.mean_ps == doctest::Approx(16.0 / 3));
}

TEST_CASE("pooled aggregation averages over ARs") {
  const auto r = boxes({{0, 0, 10, 10}});
  const std::vector<ArInput> three{{1, {5, 5}}, {2, {16, 5}}, {3, {22, 5}}};
  const std::vector<ArInput> one{{4, {5, 18}}};
  const std::vector<ImageEvaluation> evals{evaluate_image("a", ContingencyCategory::TP, three, r),
                                           evaluate_image("b", ContingencyCategory::TP, one, r)};
  const auto macro = row(summarize(evals, Aggregation::macro), "TP");
  const auto pooled = row(summarize(evals, Aggregation::pooled), "TP");
  CHECK(macro.n == 2);
  CHECK(*macro.mean_ps == doctest::Approx((6.0 + 8.0) / 2));
  CHECK(pooled.n == 4);
  CHECK(*pooled.mean_ps == doctest::Approx((0.0 + 6 + 12 + 8) / 4));
  CHECK(*pooled.mean_acr == doctest::Approx(0.25));
}

TEST_CASE("metric invariants on random configurations") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> pos(0.0, 512.0);
  std::uniform_real_distribution<double> ext(0.0, 60.0);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> shift(-200.0, 200.0);
  for (int k = 0; k < 1000; ++k) {
    std::vector<BoundingRegion> regs;
    for (int i = count(rng); i > 0; --i) {
      const double x = pos(rng);
      const double y = pos(rng);
      regs.push_back({{x, y, x + ext(rng), y + ext(rng)}, {}});
    }
    std::vector<PixelPoint> ars;
    for (int i = count(rng); i > 0; --i) ars.push_back({pos(rng), pos(rng)});
    // Some ARs land exactly on a corner so the boundary case is exercised.
    if (k % 4 == 0) ars.push_back({regs[0].box.max_x, regs[0].box.min_y});

    const double ps = *proximity_score(ars, regs);
    const double acr = *attribution_colocation_ratio(ars, regs);
    CHECK(ps >= 0.0);
    CHECK(acr >= 0.0);
    CHECK(acr <= 1.0);
    CHECK((ps == 0.0) == (acr == 1.0));

    auto more = regs;
    const double x = pos(rng);
    const double y = pos(rng);
    more.push_back({{x, y, x + ext(rng), y + ext(rng)}, {}});
    CHECK(*proximity_score(ars, more) <= ps);
    CHECK(*attribution_colocation_ratio(ars, more) >= acr);

    const double dx = std::round(shift(rng));
    const double dy = std::round(shift(rng));
    auto moved_regs = regs;
    for (auto& r : moved_regs) r.box = {r.box.min_x + dx, r.box.min_y + dy, r.box.max_x + dx, r.box.max_y + dy};
    auto moved_ars = ars;
    for (auto& a : moved_ars) a = {a.x + dx, a.y + dy};
    CHECK(std::abs(*proximity_score(moved_ars, moved_regs) - ps) <= 1e-9);
    CHECK(*attribution_colocation_ratio(moved_ars, moved_regs) == acr);
  }
}
