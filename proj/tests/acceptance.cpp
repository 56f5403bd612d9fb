// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "support.hpp"

#include "rftext/forest.hpp"
#include "rftext/ruleparse.hpp"
#include "rftext/serialize.hpp"
#include "rftext/validate.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>

using namespace rftext;
using namespace rftext::test;

namespace {

struct Named {
    std::string name;
    Dataset data;
};

std::vector<Named> datasets() { return {{"iris", iris()}, {"wine", wine()}, {"breast_cancer", breast_cancer()}}; }

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
    failures += !pass;
}

void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report(name, pass, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

// Threshold and value as they read in the text, computed without the library's renderers.
double two_decimals(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::strtod(buf, nullptr);
}

double scaled(double v, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    return std::clamp(std::round((v - lo) / (hi - lo) * 99.0), 0.0, 99.0);
}

std::pair<bool, std::string> rf_baseline() {
    const double targets[] = {94.93, 97.30, 94.72};
    bool pass = true;
    std::string detail;
    int k = 0;
    for (const auto& [name, ds] : datasets()) {
        const auto start = std::chrono::steady_clock::now();
        const auto s = cross_validate(ds, 5, 5, {}, 0);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = std::abs(s.mean_accuracy - targets[k]) <= 3.0 && secs < 60.0;
        pass = pass && ok;
        detail += fmt::format("{}{} {:.2f}% (target {:.2f}% +/- 3, {:.1f}s)", k ? "; " : "", name, s.mean_accuracy,
                              targets[k], secs);
        ++k;
    }
    return {pass, detail};
}

std::pair<bool, std::string> echo_closure() {
    std::size_t pairs = 0, mismatches = 0, runs = 0, bad_rows = 0;
    for (const auto& [name, ds] : datasets()) {
        std::vector<std::int64_t> groups(static_cast<std::size_t>(ds.rows()));
        std::iota(groups.begin(), groups.end(), 0);
        const auto split = grouped_stratified_split(ds, groups, {}, 0);
        const auto train = ds.subset(split.indices(Partition::Train));
        const auto forest = fit_forest(train, {}, 0);
        for (const auto& config : PreprocessConfig::all()) {
            ++runs;
            const auto enc = TextEncoding::fit(train, config);
            const Validator validator(train, enc);
            const auto corpus = build_corpus(ds, split, forest, 2, enc, 0);
            std::vector<ValidationRecord> records;
            for (const auto& pair : corpus.pairs) {
                const auto rec = validator.score(static_cast<std::int64_t>(pair.pair_id), pair.output, pair.label);
                records.push_back(rec);
                ++pairs;
                // Independent filter over the training rows.
                std::vector<std::size_t> region;
                for (Eigen::Index i = 0; i < train.rows(); ++i) {
                    bool inside = true;
                    for (const auto& n : pair.path.nodes) {
                        const double lo = enc.scaling.v_min(n.feature), hi = enc.scaling.v_max(n.feature);
                        const double v = train.features(i, n.feature);
                        const double lhs = config.integer_normalisation ? scaled(v, lo, hi) : v;
                        const double rhs = config.integer_normalisation ? scaled(n.threshold, lo, hi) : two_decimals(n.threshold);
                        inside = inside && (n.direction < 0 ? lhs <= rhs : lhs > rhs);
                    }
                    if (inside) region.push_back(static_cast<std::size_t>(i));
                }
                const auto parsed = parse_output(pair.output, train.feature_names, config);
                const bool same_set = std::holds_alternative<ParsedStatement>(parsed) &&
                                      designate_subset(std::get<ParsedStatement>(parsed), validator.space()) == region;
                std::optional<double> purity;
                if (!region.empty()) {
                    const auto hits = std::count_if(region.begin(), region.end(),
                                                    [&](std::size_t i) { return train.labels[i] == pair.label; });
                    purity = static_cast<double>(hits) / static_cast<double>(region.size());
                }
                if (!same_set || rec.statement_precision != purity) ++mismatches;
            }
            const auto row = aggregate_report(records, config.tag());
            if (to_csv_line(row).find(fmt::format("{},100.00,", config.tag())) != 0 || row.correct != 100.0) ++bad_rows;
        }
    }
    return {mismatches == 0 && bad_rows == 0,
            fmt::format("{} runs, {} pairs, {} precision/set mismatches, {} runs below 100% correct or label accuracy",
                        runs, pairs, mismatches, bad_rows)};
}

std::pair<bool, std::string> round_trip() {
    const auto all = datasets();
    std::vector<RandomForest> forests;
    for (const auto& d : all) forests.push_back(fit_forest(d.data, {}, 17));
    std::mt19937_64 gen(2024);
    const std::size_t cases = 1500;
    std::size_t failed = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        const auto d = gen() % all.size();
        const auto& ds = all[d].data;
        const auto i = static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(ds.rows()));
        const auto& tree = forests[d].trees[gen() % forests[d].trees.size()];
        const auto config = PreprocessConfig::all()[gen() % 8];
        const auto enc = TextEncoding::fit(ds, config);
        const auto x = ds.features.row(i);
        const auto path = tree_decision_path(tree, x);
        const auto parsed = parse_output(render_output(path, x, enc), ds.feature_names, config);
        bool ok = std::holds_alternative<ParsedStatement>(parsed);
        if (ok) {
            const auto& s = std::get<ParsedStatement>(parsed);
            ok = s.predicted_label == path.label && s.predicates.size() == path.nodes.size();
            for (std::size_t k = 0; ok && k < s.predicates.size(); ++k) {
                const auto& n = path.nodes[k];
                const double expected = config.integer_normalisation
                                            ? scaled(n.threshold, enc.scaling.v_min(n.feature), enc.scaling.v_max(n.feature))
                                            : two_decimals(n.threshold);
                ok = s.predicates[k].feature_index == n.feature &&
                     s.predicates[k].comparator == (n.direction < 0 ? Comparator::LE : Comparator::GT) &&
                     s.predicates[k].threshold == expected;
            }
        }
        failed += !ok;
    }
    return {failed == 0, fmt::format("{} randomized cases, {} failures", cases, failed)};
}

std::pair<bool, std::string> golden() {
    Eigen::RowVectorXd x(4);
    x << 6.80, 2.80, 4.80, 1.40;
    const auto prompt = render_prompt(x, TextEncoding::fit(iris(), {}), 3);
    const std::string fragment =
        "sepal length (cm): 6.80, sepal width (cm): 2.80, petal length (cm): 4.80, petal width (cm): 1.40";
    const bool prompt_ok = prompt.find(fragment) != std::string::npos;

    const auto names = iris().feature_names;
    const auto r = parse_output("petal length (cm) 6.70 > 2.45 and sepal length (cm) 6.70 > 6.75. Label: 1", names, {});
    bool parse_ok = std::holds_alternative<ParsedStatement>(r);
    if (parse_ok) {
        const auto& s = std::get<ParsedStatement>(r);
        parse_ok = s.predicted_label == 1 && s.predicates.size() == 2 &&
                   s.predicates[0] == Predicate{"petal length (cm)", 2, Comparator::GT, 2.45} &&
                   s.predicates[1] == Predicate{"sepal length (cm)", 0, Comparator::GT, 6.75};
    }
    return {prompt_ok && parse_ok, fmt::format("prompt fragment {}, output parse {}", prompt_ok ? "exact" : "differs",
                                               parse_ok ? "two GT predicates, label 1" : "wrong")};
}

std::pair<bool, std::string> virginica_metrics() {
    const auto ds = iris();
    ParsedStatement s;
    s.predicates = {{"petal length (cm)", 2, Comparator::GT, 2.45}, {"petal width (cm)", 3, Comparator::GT, 1.75}};
    s.predicted_label = 2;
    const auto m = statement_metrics(designate_subset(s, ds.features), 2, ds.labels);
    const bool ok = m.subset_size == 46 && m.true_positives == 45 && m.class_support == 50 &&
                    m.precision == 45.0 / 46.0 && m.recall == 45.0 / 50.0;
    return {ok, fmt::format("subset {} (expected 46), virginica {} (45), support {} (50), precision {:.6f}, recall {:.6f}",
                            m.subset_size, m.true_positives, m.class_support, m.precision.value_or(-1),
                            m.recall.value_or(-1))};
}

std::pair<bool, std::string> preprocessing_invariants() {
    std::mt19937_64 gen(10000);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    const int cases = 10000;
    int violations = 0;
    PreprocessConfig config;
    config.integer_normalisation = true;
    for (int c = 0; c < cases; ++c) {
        ScalingParams s;
        const double a = u(gen), b = u(gen);
        s.v_min = Eigen::RowVectorXd::Constant(1, std::min(a, b));
        s.v_max = Eigen::RowVectorXd::Constant(1, std::max(a, b));
        double v1 = u(gen) * 1.5, v2 = u(gen) * 1.5;
        if (v1 > v2) std::swap(v1, v2);
        const int s1 = scale_value(s, 0, v1, config), s2 = scale_value(s, 0, v2, config);
        violations += s1 > s2 || s1 < 0 || s1 > 99 || s2 < 0 || s2 > 99;
        violations += scale_value(s, 0, std::clamp(v1, s.v_min(0), s.v_max(0)), config) != s1;

        PercentileBins bins;
        bins.cuts.resize(1, 5);
        std::array<double, 5> cuts;
        for (auto& cut : cuts) cut = std::round(u(gen)) / 4.0;
        std::sort(cuts.begin(), cuts.end());
        for (int k = 0; k < 5; ++k) bins.cuts(0, k) = cuts[static_cast<std::size_t>(k)];
        const double v = c % 4 == 0 ? cuts[static_cast<std::size_t>(c % 5)] : std::round(u(gen)) / 3.0;
        const auto cls = describe_value(bins, 0, v);
        const bool bands[5] = {v < cuts[0], v >= cuts[0] && v < cuts[1], v >= cuts[1] && v <= cuts[3],
                               v > cuts[3] && v <= cuts[4], v > cuts[4]};
        violations += std::count(std::begin(bands), std::end(bands), true) != 1 || !bands[static_cast<int>(cls)];
    }
    return {violations == 0, fmt::format("{} cases, {} violations", cases, violations)};
}

}  // namespace

int main() {
    criterion("rf-baseline-5cv5", rf_baseline);
    criterion("echo-oracle-closure", echo_closure);
    criterion("round-trip-property", round_trip);
    criterion("golden-strings", golden);
    criterion("virginica-metric-arithmetic", virginica_metrics);
    criterion("preprocessing-invariants", preprocessing_invariants);
    fmt::print("{} of 6 criteria passed\n", 6 - failures);
    return failures == 0 ? 0 : 1;
}
