#include "cli.hpp"

#include "manifest.hpp"

#include "rftext/dataset.hpp"
#include "rftext/forest.hpp"
#include "rftext/preprocess.hpp"
#include "rftext/ruleparse.hpp"
#include "rftext/serialize.hpp"
#include "rftext/validate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rftext::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSplitFormat = "rftext-split";
constexpr std::string_view kManifestFormat = "rftext-manifest";
constexpr int kFormatVersion = 1;

void expect_format(const json& doc, std::string_view format, const fs::path& path) {
    if (!doc.is_object() || doc.value("format", std::string{}) != format || doc.value("version", 0) != kFormatVersion)
        throw InputError(fmt::format("'{}' is not a version {} {} document", path.string(), kFormatVersion, format));
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::vector<json> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(fmt::format("{}:{}: invalid JSON record: {}", path.string(), line_no, e.what()));
        }
    }
    return records;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot create '{}'", path.string()));
    return out;
}

template <typename T>
T field(const json& rec, std::string_view key, const fs::path& source) {
    try {
        return rec.at(std::string(key)).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InputError(fmt::format("{}: record lacks a valid '{}' field", source.string(), key));
    }
}

SplitAssignment load_split(const json& doc, std::size_t n_examples) {
    SplitAssignment split;
    split.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& p : doc.at("assignment")) split.partition.push_back(partition_from_string(p.get<std::string>()));
    if (split.partition.size() != n_examples)
        throw InputError(fmt::format("split covers {} examples, dataset has {}", split.partition.size(), n_examples));
    return split;
}

std::string default_tag(const fs::path& dataset, const PreprocessConfig& config) {
    return fmt::format("{}({})", dataset.stem().string(), config.tag());
}

// ---------------------------------------------------------------------------

struct SplitOptions {
    std::string data, out;
    std::vector<double> fractions{0.7, 0.1, 0.2};
    std::uint64_t seed = 0;
};

void cmd_split(const SplitOptions& o, std::ostream& out) {
    const auto ds = load_csv(o.data);
    if (o.fractions.size() != 3) throw InputError("--fractions needs three values: train,validation,test");
    std::vector<std::int64_t> groups(static_cast<std::size_t>(ds.rows()));
    for (std::size_t i = 0; i < groups.size(); ++i) groups[i] = static_cast<std::int64_t>(i);
    const auto split = grouped_stratified_split(ds, groups, {o.fractions[0], o.fractions[1], o.fractions[2]}, o.seed);

    json assignment = json::array();
    for (auto p : split.partition) assignment.push_back(to_string(p));
    const auto n_train = split.indices(Partition::Train).size();
    const auto n_val = split.indices(Partition::Validation).size();
    const auto n_test = split.indices(Partition::Test).size();
    write_json_file(o.out, json{{"format", kSplitFormat},
                                {"version", kFormatVersion},
                                {"dataset", artifact_ref(o.data)},
                                {"seed", o.seed},
                                {"fractions", {{"train", o.fractions[0]}, {"validation", o.fractions[1]}, {"test", o.fractions[2]}}},
                                {"counts", {{"train", n_train}, {"validation", n_val}, {"test", n_test}}},
                                {"assignment", std::move(assignment)}});
    out << fmt::format("train={} validation={} test={}\n", n_train, n_val, n_test);
}

// ---------------------------------------------------------------------------

struct ForestOptions {
    int trees = 100;
    int max_depth = 2;
    int max_features = 0;
    bool no_bootstrap = false;

    ForestParams params() const { return {trees, max_depth, max_features, !no_bootstrap}; }
};

void add_forest_options(CLI::App* cmd, ForestOptions& f) {
    cmd->add_option("--trees", f.trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", f.max_depth, "Maximum tree depth")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-features", f.max_features, "Features tried per split (0: ceil(sqrt(F)))")->capture_default_str();
    cmd->add_flag("--no-bootstrap", f.no_bootstrap, "Fit every tree on the full training partition");
}

struct TrainOptions {
    std::string data, split, out;
    ForestOptions forest;
    std::uint64_t seed = 0;
};

void cmd_train(const TrainOptions& o, std::ostream& out) {
    const auto split_doc = read_json_file(o.split);
    expect_format(split_doc, kSplitFormat, o.split);
    verify_same_artifact(split_doc.at("dataset"), o.data, "dataset");
    const auto ds = load_csv(o.data);
    const auto split = load_split(split_doc, static_cast<std::size_t>(ds.rows()));
    const auto train = ds.subset(split.indices(Partition::Train));

    const auto forest = fit_forest(train, o.forest.params(), o.seed);
    auto doc = forest_to_json(forest);
    doc["provenance"] = {{"dataset", artifact_ref(o.data)}, {"split", artifact_ref(o.split)}};
    write_json_file(o.out, doc);

    int depth = 0;
    for (const auto& t : forest.trees) depth = std::max(depth, t.depth());
    out << fmt::format("trees={} max_depth={} train_examples={}\n", forest.trees.size(), depth, train.rows());
}

// ---------------------------------------------------------------------------

struct PreprocessOptions {
    bool in = false, vd = false, re = false;
    std::string tag;
    int range_min = 0, range_max = 99;

    PreprocessConfig config() const {
        PreprocessConfig c = tag.empty() ? PreprocessConfig{} : PreprocessConfig::from_tag(tag);
        c.integer_normalisation = c.integer_normalisation || in;
        c.verbal_description = c.verbal_description || vd;
        c.relation_encoding = c.relation_encoding || re;
        c.range_min = range_min;
        c.range_max = range_max;
        if (c.range_min >= c.range_max) throw InputError("--range-min must be below --range-max");
        return c;
    }
};

struct EmitOptions {
    std::string data, split, forest, corpus, prompts, manifest;
    PreprocessOptions pre;
    int n_paths = 2;
    std::uint64_t seed = 0;
};

void cmd_emit(const EmitOptions& o, std::ostream& out) {
    const auto split_doc = read_json_file(o.split);
    expect_format(split_doc, kSplitFormat, o.split);
    verify_same_artifact(split_doc.at("dataset"), o.data, "dataset");
    const auto forest_doc = read_json_file(o.forest);
    if (!forest_doc.contains("provenance")) throw InputError("forest document has no provenance record");
    verify_same_artifact(forest_doc.at("provenance").at("split"), o.split, "split");
    verify_same_artifact(forest_doc.at("provenance").at("dataset"), o.data, "dataset");

    const auto ds = load_csv(o.data);
    const auto split = load_split(split_doc, static_cast<std::size_t>(ds.rows()));
    const auto forest = forest_from_json(forest_doc);
    if (forest.n_features != ds.cols() || forest.n_classes != ds.n_classes())
        throw InputError("forest shape does not match the dataset");

    const auto config = o.pre.config();
    const auto enc = TextEncoding::fit(ds.subset(split.indices(Partition::Train)), config);
    const auto corpus = build_corpus(ds, split, forest, o.n_paths, enc, o.seed);
    {
        auto sink = open_output(o.corpus);
        write_corpus_jsonl(corpus, sink);
    }
    {
        auto sink = open_output(o.prompts);
        write_prompts_jsonl(ds, split, enc, sink);
    }

    const auto& s = corpus.stats;
    write_json_file(o.manifest,
                    json{{"format", kManifestFormat},
                         {"version", kFormatVersion},
                         {"seed", o.seed},
                         {"dataset", artifact_ref(o.data)},
                         {"split", artifact_ref(o.split)},
                         {"split_fractions", split_doc.at("fractions")},
                         {"forest", artifact_ref(o.forest)},
                         {"forest_params", forest_doc.at("params")},
                         {"n_trees", o.n_paths},
                         {"feature_names", ds.feature_names},
                         {"class_names", ds.class_names},
                         {"preprocess",
                          {{"config", to_json(config)},
                           {"tag", config.tag()},
                           {"scaling", to_json(enc.scaling)},
                           {"percentiles", to_json(enc.bins)},
                           {"verbal_description_space", "raw"},
                           {"validation_space", config.integer_normalisation ? "scaled" : "raw"},
                           {"prompt_footer", "mirrors-active-config"}}},
                         {"artifacts", {{"corpus", artifact_ref(o.corpus)}, {"prompts", artifact_ref(o.prompts)}}},
                         {"stats",
                          {{"examples", s.examples},
                           {"examples_covered", s.examples_covered},
                           {"examples_without_path", s.examples_without_path},
                           {"pairs", s.pairs}}}});
    out << fmt::format("config={} examples={} covered={} without_path={} pairs={}\n", config.tag(), s.examples,
                       s.examples_covered, s.examples_without_path, s.pairs);
}

// ---------------------------------------------------------------------------

struct LoadedManifest {
    json doc;
    Dataset data;
    SplitAssignment split;
    TextEncoding encoding;
};

LoadedManifest load_manifest(const fs::path& path) {
    LoadedManifest m;
    m.doc = read_json_file(path);
    expect_format(m.doc, kManifestFormat, path);
    verify_artifact(m.doc.at("dataset"), "dataset");
    verify_artifact(m.doc.at("split"), "split");
    m.data = load_csv(m.doc.at("dataset").at("path").get<std::string>());
    const auto split_doc = read_json_file(m.doc.at("split").at("path").get<std::string>());
    m.split = load_split(split_doc, static_cast<std::size_t>(m.data.rows()));
    const auto& pre = m.doc.at("preprocess");
    m.encoding = {m.data.feature_names, scaling_from_json(pre.at("scaling")), bins_from_json(pre.at("percentiles")),
                  config_from_json(pre.at("config"))};
    if (m.encoding.scaling.v_min.size() != m.data.cols() || m.encoding.bins.cuts.rows() != m.data.cols())
        throw InputError("fitted preprocessing parameters do not match the dataset width");
    return m;
}

struct ValidateOptions {
    std::string manifest, corpus, outputs, report, audit, tag, only_split;
};

void cmd_validate(const ValidateOptions& o, std::ostream& out) {
    const auto m = load_manifest(o.manifest);
    const auto train = m.data.subset(m.split.indices(Partition::Train));
    const Validator validator(train, m.encoding);

    std::vector<ValidationRecord> records;
    if (!o.corpus.empty()) {
        verify_same_artifact(m.doc.at("artifacts").at("corpus"), o.corpus, "corpus");
        for (const auto& rec : read_jsonl(o.corpus)) {
            if (!o.only_split.empty() && field<std::string>(rec, "split", o.corpus) != o.only_split) continue;
            records.push_back(validator.score(field<std::int64_t>(rec, "id", o.corpus),
                                              field<std::string>(rec, "output", o.corpus),
                                              field<int>(rec, "label", o.corpus)));
        }
    } else {
        const auto& prompts_ref = m.doc.at("artifacts").at("prompts");
        verify_artifact(prompts_ref, "prompts");
        const fs::path prompts_path = prompts_ref.at("path").get<std::string>();
        std::map<std::int64_t, std::pair<int, std::string>> prompts;
        for (const auto& rec : read_jsonl(prompts_path))
            prompts[field<std::int64_t>(rec, "id", prompts_path)] = {field<int>(rec, "label", prompts_path),
                                                                      field<std::string>(rec, "split", prompts_path)};
        for (const auto& rec : read_jsonl(o.outputs)) {
            const auto id = field<std::int64_t>(rec, "id", o.outputs);
            const auto it = prompts.find(id);
            if (it == prompts.end())
                throw InputError(fmt::format("{}: output id {} has no matching prompt", o.outputs, id));
            if (!o.only_split.empty() && it->second.second != o.only_split) continue;
            records.push_back(validator.score(id, field<std::string>(rec, "generated_text", o.outputs), it->second.first));
        }
    }

    const auto tag = o.tag.empty() ? default_tag(m.doc.at("dataset").at("path").get<std::string>(), m.encoding.config)
                                   : o.tag;
    const auto row = aggregate_report(records, tag);
    {
        auto csv = open_output(o.report);
        csv << kReportHeader << '\n' << to_csv_line(row) << '\n';
    }
    if (!o.audit.empty()) {
        auto sink = open_output(o.audit);
        std::vector<const ValidationRecord*> ordered;
        for (const auto& r : records) ordered.push_back(&r);
        std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });
        for (const auto* r : ordered) sink << to_json(*r).dump() << '\n';
    }
    write_json_file(o.report + ".meta.json",
                    json{{"tag", row.tag},
                         {"records", row.records},
                         {"empty_subsets", row.empty_subsets},
                         {"undefined_recall", row.undefined_recall},
                         {"statement_accuracy", "mean statement precision over records with a non-empty subset"},
                         {"recall_averaging", "per-output recall, arithmetic mean over records"},
                         {"validation_set", "training partition"},
                         {"validation_space", m.encoding.config.integer_normalisation ? "scaled" : "raw"}});
    out << kReportHeader << '\n' << to_csv_line(row) << '\n';
}

// ---------------------------------------------------------------------------

struct CvOptions {
    std::string data, out;
    int folds = 5, repeats = 5;
    ForestOptions forest;
    std::uint64_t seed = 0;
};

void cmd_cv(const CvOptions& o, std::ostream& out) {
    const auto ds = load_csv(o.data);
    const auto summary = cross_validate(ds, o.folds, o.repeats, o.forest.params(), o.seed);
    if (!o.out.empty())
        write_json_file(o.out, json{{"dataset", artifact_ref(o.data)},
                                    {"folds", o.folds},
                                    {"repeats", o.repeats},
                                    {"seed", o.seed},
                                    {"mean_accuracy", summary.mean_accuracy},
                                    {"std_accuracy", summary.std_accuracy},
                                    {"fold_accuracies", summary.fold_accuracies}});
    out << fmt::format("mean_accuracy={:.2f} std_accuracy={:.2f} folds={} repeats={}\n", summary.mean_accuracy,
                       summary.std_accuracy, o.folds, o.repeats);
}

// ---------------------------------------------------------------------------

struct ReportOptions {
    std::vector<std::string> inputs;
    std::string out;
};

void cmd_report(const ReportOptions& o, std::ostream& out) {
    std::ostringstream table;
    table << kReportHeader << '\n';
    for (const auto& path : o.inputs) {
        std::ifstream in(path);
        if (!in) throw InputError(fmt::format("cannot open '{}'", path));
        std::string line;
        if (!std::getline(in, line) || line != kReportHeader)
            throw InputError(fmt::format("'{}' is not a validation report", path));
        while (std::getline(in, line))
            if (!line.empty()) table << line << '\n';
    }
    auto sink = open_output(o.out);
    sink << table.str();
    out << table.str();
}

// ---------------------------------------------------------------------------

struct ParseOptions {
    std::string input, manifest, output;
};

void cmd_parse(const ParseOptions& o, std::ostream& out) {
    const auto manifest = read_json_file(o.manifest);
    expect_format(manifest, kManifestFormat, o.manifest);
    const auto names = manifest.at("feature_names").get<std::vector<std::string>>();
    const auto config = config_from_json(manifest.at("preprocess").at("config"));

    auto sink = open_output(o.output);
    std::size_t ok = 0, total = 0;
    for (const auto& rec : read_jsonl(o.input)) {
        ++total;
        const auto outcome = parse_output(field<std::string>(rec, "generated_text", o.input), names, config);
        json result{{"id", rec.at("id")}};
        if (const auto* s = std::get_if<ParsedStatement>(&outcome)) {
            ++ok;
            json predicates = json::array();
            for (const auto& p : s->predicates)
                predicates.push_back({{"feature", p.feature_name}, {"comparator", to_string(p.comparator)}, {"threshold", p.threshold}});
            result["status"] = "ok";
            result["lenient"] = s->lenient;
            result["predicates"] = std::move(predicates);
            result["label"] = s->predicted_label;
        } else {
            const auto& f = std::get<ParseFailure>(outcome);
            result["status"] = to_string(f.reason);
            result["offset"] = f.offset;
            result["predicates"] = json::array();
            result["label"] = f.label ? json(*f.label) : json(nullptr);
        }
        sink << result.dump() << '\n';
    }
    out << fmt::format("parsed={} total={}\n", ok, total);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random forest decision paths to rule-statement corpora, and validation of generated rules"};
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    SplitOptions split_o;
    auto* split = app.add_subcommand("split", "Grouped stratified train/validation/test split");
    split->add_option("--data", split_o.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    split->add_option("--fractions", split_o.fractions, "train,validation,test")->delimiter(',')->capture_default_str();
    split->add_option("--seed", split_o.seed)->capture_default_str();
    split->add_option("--out", split_o.out, "Partition JSON")->required();

    TrainOptions train_o;
    auto* train = app.add_subcommand("train", "Fit the random forest on the training partition");
    train->add_option("--data", train_o.data)->required()->check(CLI::ExistingFile);
    train->add_option("--split", train_o.split)->required()->check(CLI::ExistingFile);
    add_forest_options(train, train_o.forest);
    train->add_option("--seed", train_o.seed)->capture_default_str();
    train->add_option("--out", train_o.out, "Forest JSON")->required();

    EmitOptions emit_o;
    auto* emit = app.add_subcommand("emit", "Render prompt/output pairs from sampled decision paths");
    emit->add_option("--data", emit_o.data)->required()->check(CLI::ExistingFile);
    emit->add_option("--split", emit_o.split)->required()->check(CLI::ExistingFile);
    emit->add_option("--forest", emit_o.forest)->required()->check(CLI::ExistingFile);
    emit->add_flag("--in", emit_o.pre.in, "Integer normalisation");
    emit->add_flag("--vd", emit_o.pre.vd, "Verbal description of values");
    emit->add_flag("--re", emit_o.pre.re, "Relation encoding");
    emit->add_option("--preprocess", emit_o.pre.tag, "Combined tag, e.g. IN+VD+RE");
    emit->add_option("--range-min", emit_o.pre.range_min)->capture_default_str();
    emit->add_option("--range-max", emit_o.pre.range_max)->capture_default_str();
    emit->add_option("--n-trees", emit_o.n_paths, "Paths sampled per example")->capture_default_str()->check(CLI::PositiveNumber);
    emit->add_option("--seed", emit_o.seed)->capture_default_str();
    emit->add_option("--corpus", emit_o.corpus, "Corpus JSONL")->required();
    emit->add_option("--prompts", emit_o.prompts, "Per-example prompts JSONL")->required();
    emit->add_option("--manifest", emit_o.manifest, "Run manifest JSON")->required();

    ValidateOptions validate_o;
    auto* validate = app.add_subcommand("validate", "Score rule statements against the training partition");
    validate->add_option("--manifest", validate_o.manifest)->required()->check(CLI::ExistingFile);
    auto* corpus_opt = validate->add_option("--corpus", validate_o.corpus, "Corpus JSONL (echo oracle)")->check(CLI::ExistingFile);
    auto* outputs_opt = validate->add_option("--outputs", validate_o.outputs, "Generated {id, generated_text} JSONL")->check(CLI::ExistingFile);
    corpus_opt->excludes(outputs_opt);
    validate->add_option("--split", validate_o.only_split, "Only score records of this partition")
        ->check(CLI::IsMember({"train", "validation", "test"}));
    validate->add_option("--report", validate_o.report, "Report CSV")->required();
    validate->add_option("--audit", validate_o.audit, "Per-record JSONL");
    validate->add_option("--tag", validate_o.tag, "Row name in the report");

    CvOptions cv_o;
    auto* cv = app.add_subcommand("cv", "Repeated stratified k-fold accuracy of the forest");
    cv->add_option("--data", cv_o.data)->required()->check(CLI::ExistingFile);
    cv->add_option("--folds", cv_o.folds)->capture_default_str();
    cv->add_option("--repeats", cv_o.repeats)->capture_default_str();
    add_forest_options(cv, cv_o.forest);
    cv->add_option("--seed", cv_o.seed)->capture_default_str();
    cv->add_option("--out", cv_o.out, "Summary JSON");

    ReportOptions report_o;
    auto* report = app.add_subcommand("report", "Concatenate validation rows into one table");
    report->add_option("inputs", report_o.inputs, "Report CSVs from validate")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_o.out)->required();

    ParseOptions parse_o;
    auto* parse = app.add_subcommand("parse", "Parse generated text into predicates and a label");
    parse->add_option("--input", parse_o.input, "{id, generated_text} JSONL")->required()->check(CLI::ExistingFile);
    parse->add_option("--manifest", parse_o.manifest)->required()->check(CLI::ExistingFile);
    parse->add_option("--output", parse_o.output)->required();

    std::function<void()> action;
    split->callback([&] { action = [&] { cmd_split(split_o, out); }; });
    train->callback([&] { action = [&] { cmd_train(train_o, out); }; });
    emit->callback([&] { action = [&] { cmd_emit(emit_o, out); }; });
    validate->callback([&] {
        if (validate_o.corpus.empty() == validate_o.outputs.empty())
            throw CLI::ValidationError("validate", "exactly one of --corpus or --outputs is required");
        action = [&] { cmd_validate(validate_o, out); };
    });
    cv->callback([&] { action = [&] { cmd_cv(cv_o, out); }; });
    report->callback([&] { action = [&] { cmd_report(report_o, out); }; });
    parse->callback([&] { action = [&] { cmd_parse(parse_o, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (action) action();
        return kSuccess;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

}  // namespace rftext::cli
