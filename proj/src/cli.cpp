#include "margin/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "margin/error.hpp"
#include "margin/io.hpp"
#include "margin/manifest.hpp"
#include "margin/parallel.hpp"
#include "margin/pipelines.hpp"

namespace margin::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kOutputDirEnv = "MARGIN_OUTPUT_DIR";

enum class ParamType { String, Integer, Number, Flag, Bandwidth };

struct ParamSpec {
  std::string name;
  ParamType type;
  json fallback;
  std::string help;
};

struct InputSpec {
  std::string name;
  bool required;
  std::string help;
};

enum class SeedUse { None, Required, Strategy };

struct Outputs;

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<InputSpec> inputs;
  std::vector<ParamSpec> params;
  SeedUse seed = SeedUse::None;
  std::string default_output;
  std::function<void(const RunManifest&, Outputs&)> run;
};

// Primary output path plus siblings named <stem>.<suffix> in the same folder.
struct Outputs {
  fs::path primary;
  json schemas = json::object();

  fs::path sibling(const std::string& suffix) const {
    return primary.parent_path() / (primary.stem().string() + "." + suffix);
  }

  template <class Writer>
  void csv(const fs::path& path, std::vector<std::string> columns, Writer&& writer) {
    schemas[path.filename().string()] = std::move(columns);
    io::write_file(path, std::forward<Writer>(writer));
  }

  void report(const fs::path& path, const json& doc) {
    schemas[path.filename().string()] = "json";
    io::write_text(path, doc.dump(2) + "\n");
  }
};

std::string flag_name(const std::string& param) {
  std::string out = param;
  std::replace(out.begin(), out.end(), '_', '-');
  return "--" + out;
}

json parse_value(const ParamSpec& spec, const std::string& text) {
  auto fail = [&](const char* what) {
    return UsageError(flag_name(spec.name) + ": expected " + what + ", got '" + text + "'");
  };
  switch (spec.type) {
    case ParamType::String: return text;
    case ParamType::Flag: return text == "true" || text == "1";
    case ParamType::Integer: {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) throw fail("an integer");
      return v;
    }
    case ParamType::Number: {
      double v = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) throw fail("a number");
      return v;
    }
    case ParamType::Bandwidth: {
      if (text == "median") return text;
      double v = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v)) {
        throw fail("'median' or a positive number");
      }
      return v;
    }
  }
  return text;
}

void check_param_type(const ParamSpec& spec, const json& value) {
  bool ok = false;
  switch (spec.type) {
    case ParamType::String: ok = value.is_string(); break;
    case ParamType::Flag: ok = value.is_boolean(); break;
    case ParamType::Integer: ok = value.is_number_integer(); break;
    case ParamType::Number: ok = value.is_number(); break;
    case ParamType::Bandwidth: ok = value == "median" || (value.is_number() && value.get<double>() > 0.0); break;
  }
  if (!ok) throw UsageError("manifest parameter '" + spec.name + "' has the wrong type: " + value.dump());
}

// ---- parameter access --------------------------------------------------------

struct Params {
  const RunManifest& manifest;

  std::string str(const std::string& key) const { return manifest.params.at(key).get<std::string>(); }
  long long integer(const std::string& key) const { return manifest.params.at(key).get<long long>(); }
  double number(const std::string& key) const { return manifest.params.at(key).get<double>(); }
  bool flag(const std::string& key) const { return manifest.params.at(key).get<bool>(); }
  std::optional<double> bandwidth(const std::string& key) const {
    const auto& v = manifest.params.at(key);
    if (v.is_string()) return std::nullopt;
    return v.get<double>();
  }
  bool has_input(const std::string& key) const {
    return manifest.inputs.contains(key) && !manifest.inputs.at(key).get<std::string>().empty();
  }
  fs::path input(const std::string& key) const { return manifest.inputs.at(key).get<std::string>(); }
  std::optional<fs::path> optional_input(const std::string& key) const {
    if (!has_input(key)) return std::nullopt;
    return input(key);
  }
  std::uint64_t seed() const { return manifest.seed.value_or(0); }

  KnnConfig knn() const {
    KnnConfig cfg;
    cfg.k = static_cast<Index>(integer("k"));
    cfg.metric = parse_metric(str("metric"));
    cfg.weighting = parse_weighting(str("weighting"));
    if (const auto sigma = bandwidth("bandwidth")) cfg.bandwidth = Bandwidth::value(*sigma);
    return cfg;
  }
  KernelConfig kernel() const {
    KernelConfig cfg;
    cfg.sigma = bandwidth("kernel_bandwidth");
    return cfg;
  }
};

std::vector<ParamSpec> knn_params() {
  return {
      {"k", ParamType::Integer, 20, "neighbors per node"},
      {"metric", ParamType::String, "euclidean", "euclidean or cosine"},
      {"weighting", ParamType::String, "binary", "binary or gaussian edge weights"},
      {"bandwidth", ParamType::Bandwidth, "median", "gaussian edge bandwidth: median or a value"},
  };
}

std::vector<ParamSpec> with_knn(std::vector<ParamSpec> extra) {
  auto params = knn_params();
  params.insert(params.end(), extra.begin(), extra.end());
  return params;
}

json selection_json(const RankedSelection& sel) {
  return {{"count", sel.ids.size()}, {"order", to_string(sel.order)}, {"metadata", sel.metadata},
          {"warnings", sel.warnings}};
}

json group_json(const GroupStats& g) {
  return {{"count", g.count}, {"mean", g.mean}, {"stddev", g.stddev}, {"histogram", g.histogram}};
}

json separation_json(const SeparationSummary& s) {
  return {{"flagged", group_json(s.flagged)},
          {"unflagged", group_json(s.unflagged)},
          {"bin_edges", s.bin_edges},
          {"roc_auc", s.auc},
          {"separation", s.separation},
          {"degenerate", s.degenerate}};
}

json isolated_json(const std::vector<Index>& isolated) { return json(isolated); }

void check_rows(Index got, Index expected, const std::string& what) {
  if (got != expected) {
    throw Error(what + " has " + std::to_string(got) + " rows but " + std::to_string(expected) + " were expected");
  }
}

// ---- commands ---------------------------------------------------------------------

void run_build_graph(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const auto dataset = io::load_dataset(p.input("features"));
  const auto knn = build_knn(dataset.features, p.knn());
  out.schemas[out.primary.filename().string()] = "edge-list";
  io::save_graph(knn.graph, out.primary);
  const auto degrees = degree_info(knn.graph);
  json report = {{"nodes", knn.graph.size()},
                 {"edges", knn.graph.edges().size()},
                 {"sigma", knn.sigma ? json(*knn.sigma) : json(nullptr)},
                 {"isolated", isolated_json(degrees.isolated)},
                 {"validation", validate(knn.graph).summary()}};
  out.report(out.sibling("report.json"), report);
}

void run_influence(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const Graph graph = io::load_graph(p.input("graph"));
  const Matrix signal = io::read_signal(p.input("signal"));
  check_rows(signal.rows(), graph.size(), "signal");
  const auto method = p.str("method");
  const auto kind = parse_shift_kind(p.str("operator"));
  InfluenceScores scores;
  if (method == "phop") {
    if (signal.cols() != 1) throw Error("the phop method needs a single-column signal");
    scores = influence_scores_phop(graph, signal.col(0), static_cast<int>(p.integer("hops")));
  } else if (method == "filter") {
    if (signal.cols() == 1) {
      scores = influence_scores(graph, signal.col(0), kind, parse_magnitude(p.str("magnitude")));
    } else {
      scores = influence_scores_vector(graph, signal, kind);
    }
  } else {
    throw Error("unknown influence method '" + method + "' (expected filter or phop)");
  }
  if (p.flag("normalize")) scores = normalize_scores(std::move(scores));
  out.csv(out.primary, {"node_id", "score", "rank"}, [&](std::ostream& s) { io::write_scores_csv(s, scores.scores); });
  json report = {{"method", scores.method},
                 {"operator", scores.method == "phop" ? json("hop_support") : json(to_string(scores.kind))},
                 {"magnitude", to_string(scores.magnitude)},
                 {"normalized", scores.normalized},
                 {"nodes", graph.size()},
                 {"signal_columns", signal.cols()},
                 {"isolated", isolated_json(scores.isolated)}};
  if (scores.method == "phop") report["hops"] = scores.hops;
  if (!scores.isolated.empty()) {
    report["isolated_convention"] = scores.method == "phop"
                                        ? "rows without reachable nodes average to 0"
                                        : "zero operator row: score is the magnitude of the node's own value";
  }
  out.report(out.sibling("report.json"), report);
}

void run_spectrum(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const Graph graph = io::load_graph(p.input("graph"));
  const Matrix signal = io::read_signal(p.input("signal"));
  check_rows(signal.rows(), graph.size(), "signal");
  if (signal.cols() != 1) throw Error("spectrum needs a single-column signal");
  const auto op = shift_operator(graph, parse_shift_kind(p.str("operator")));
  FourierOptions options;
  options.max_nodes = static_cast<Index>(p.integer("max_nodes"));
  const auto basis = fourier_basis(op, options);
  const Vector spectrum = gft(basis, signal.col(0));
  out.csv(out.primary, {"index", "eigenvalue", "coefficient"},
          [&](std::ostream& s) { io::write_spectrum_csv(s, basis, spectrum); });
}

void run_prototypes(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const auto dataset = io::load_dataset(p.input("features"), p.optional_input("labels"));
  PrototypeConfig cfg;
  cfg.knn = p.knn();
  cfg.kernel = p.kernel();
  const auto mode = p.str("mode");
  if (mode != "global" && mode != "local") throw Error("mode must be global or local");
  cfg.mode = mode == "local" ? MmdMode::Local : MmdMode::Global;
  cfg.threshold_percentile = p.number("threshold");
  cfg.m_prototypes = static_cast<Index>(p.integer("m_prototypes"));
  cfg.m_criticisms = static_cast<Index>(p.integer("m_criticisms"));
  cfg.descending_prototypes = p.flag("invert_prototype_order");
  const auto result = prototypes_criticisms(dataset, cfg);

  const std::vector<std::string> sel_cols{"rank", "node_id", "score"};
  out.csv(out.primary, sel_cols, [&](std::ostream& s) { io::write_selection_csv(s, result.prototypes); });
  out.csv(out.sibling("criticisms.csv"), sel_cols,
          [&](std::ostream& s) { io::write_selection_csv(s, result.criticisms); });
  out.csv(out.sibling("function.csv"), {"node_id", "value"},
          [&](std::ostream& s) { io::write_function_csv(s, result.function.values); });
  out.csv(out.sibling("influence.csv"), {"node_id", "score", "rank"},
          [&](std::ostream& s) { io::write_scores_csv(s, result.influence.scores); });

  json summary = {{"prototypes", selection_json(result.prototypes)},
                  {"criticisms", selection_json(result.criticisms)},
                  {"kernel_sigma", result.function.sigma},
                  {"flagged_nodes", result.function.flagged},
                  {"isolated", isolated_json(result.influence.isolated)}};
  if (p.has_input("test_features")) {
    if (!dataset.labels || !p.has_input("test_labels")) {
      throw Error("1-NN evaluation needs --labels and --test-labels alongside --test-features");
    }
    const auto test = io::load_dataset(p.input("test_features"), p.input("test_labels"));
    auto evaluate = [&](const RankedSelection& sel) -> json {
      if (sel.ids.empty()) return nullptr;
      return evaluate_1nn(dataset.subset(sel.ids), test);
    };
    summary["test_error"] = {{"prototypes", evaluate(result.prototypes)},
                             {"criticisms", evaluate(result.criticisms)}};
  }
  out.report(out.sibling("summary.json"), summary);
}

void run_noisy_labels(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const auto dataset = io::load_dataset(p.input("features"), p.input("labels"));
  const auto kind = parse_shift_kind(p.str("operator"));
  const auto result = noisy_label_detection(dataset.features, *dataset.labels, p.knn(), kind);
  out.csv(out.primary, {"rank", "node_id", "score"},
          [&](std::ostream& s) { io::write_selection_csv(s, result.ranking); });
  out.csv(out.sibling("distrust.csv"), {"node_id", "value"},
          [&](std::ostream& s) { io::write_function_csv(s, result.distrust.values); });
  json summary = {{"ranking", selection_json(result.ranking)}, {"isolated", result.distrust.flagged}};
  if (p.has_input("flips")) {
    const auto flips = io::read_flags(p.input("flips"));
    check_rows(static_cast<Index>(flips.size()), dataset.size(), "flip mask");
    const double step = p.number("budget_step");
    if (!(step > 0.0 && step <= 1.0)) throw Error("budget_step must lie in (0, 1]");
    std::vector<double> grid;
    const auto steps = static_cast<long long>(std::ceil(1.0 / step - 1e-9));
    for (long long i = 0; i <= steps; ++i) grid.push_back(std::min(1.0, static_cast<double>(i) * step));
    const auto curve = recall_curve(result.ranking, flips, grid);
    out.csv(out.sibling("recall.csv"), {"budget", "recall"}, [&](std::ostream& s) { io::write_recall_csv(s, curve); });

    // Agreement of each flipped node's neighbors with its original label.
    std::vector<int> original = *dataset.labels;
    std::map<int, int> other;
    {
      std::vector<int> classes(original.begin(), original.end());
      std::sort(classes.begin(), classes.end());
      classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
      if (classes.size() == 2) {
        other[classes[0]] = classes[1];
        other[classes[1]] = classes[0];
      }
    }
    if (!other.empty()) {
      for (std::size_t i = 0; i < original.size(); ++i) {
        if (flips[i]) original[i] = other[original[i]];
      }
      const Graph graph = build_knn_graph(dataset.features, p.knn());
      const Vector agreement = neighbor_agreement(graph, original);
      out.csv(out.sibling("agreement.csv"), {"node_id", "original_agreement", "score"}, [&](std::ostream& s) {
        s << "node_id,original_agreement,score\n";
        for (std::size_t i = 0; i < flips.size(); ++i) {
          if (!flips[i]) continue;
          s << i << ',' << io::format_double(agreement[static_cast<Index>(i)]) << ','
            << io::format_double(result.influence.scores[static_cast<Index>(i)]) << '\n';
        }
      });
    }
    json at = json::object();
    for (double b : {0.1, 0.2, 0.3, 0.5}) {
      const std::vector<double> one{b};
      at[io::format_double(b)] = recall_curve(result.ranking, flips, one).recalls.front();
    }
    summary["recall_at"] = at;
    summary["flips"] = std::count(flips.begin(), flips.end(), true);
  }
  out.report(out.sibling("summary.json"), summary);
}

void run_confusing(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const auto dataset = io::load_dataset(p.input("features"), p.input("labels"));
  const auto result = confusing_samples(dataset.features, *dataset.labels, p.knn(),
                                        static_cast<Index>(p.integer("top_k")), parse_shift_kind(p.str("operator")));
  out.csv(out.primary, {"rank", "node_id", "score"},
          [&](std::ostream& s) { io::write_selection_csv(s, result.ranking); });
  out.report(out.sibling("summary.json"), {{"selection", selection_json(result.ranking)}});
}

void run_adversarial(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const auto dataset = io::load_dataset(p.input("features"), std::nullopt, p.input("flags"));
  AdversarialConfig cfg;
  cfg.knn = p.knn();
  cfg.kernel = p.kernel();
  cfg.function = parse_node_function(p.str("function"));
  cfg.bins = static_cast<Index>(p.integer("bins"));
  cfg.kde_log = p.flag("kde_log");
  cfg.kind = parse_shift_kind(p.str("operator"));
  std::optional<KdeReference> reference;
  if (cfg.function == NodeFunctionKind::Kde) {
    if (!p.has_input("reference_features") || !p.has_input("reference_labels") || !p.has_input("predicted_labels")) {
      throw Error("the kde function needs --reference-features, --reference-labels and --predicted-labels");
    }
    const auto ref = io::load_dataset(p.input("reference_features"), p.input("reference_labels"));
    reference.emplace();
    std::map<int, std::vector<Index>> rows;
    for (std::size_t i = 0; i < ref.labels->size(); ++i) rows[(*ref.labels)[i]].push_back(static_cast<Index>(i));
    for (const auto& [label, idx] : rows) reference->per_class[label] = ref.subset(idx).features;
    reference->predicted_labels = io::read_labels(p.input("predicted_labels"));
    check_rows(static_cast<Index>(reference->predicted_labels.size()), dataset.size(), "predicted labels");
  }
  const auto result = adversarial_characterization(dataset, cfg, reference ? &*reference : nullptr);
  out.csv(out.primary, {"node_id", "flag", "function", "score"}, [&](std::ostream& s) {
    s << "node_id,flag,function,score\n";
    for (Index i = 0; i < dataset.size(); ++i) {
      s << i << ',' << ((*dataset.flags)[static_cast<std::size_t>(i)] ? 1 : 0) << ','
        << io::format_double(result.function.values[i]) << ',' << io::format_double(result.influence.scores[i])
        << '\n';
    }
  });
  out.report(out.sibling("summary.json"), {{"function", to_string(cfg.function)},
                                           {"kernel_sigma", result.function.sigma},
                                           {"margin", separation_json(result.margin_summary)},
                                           {"raw_function", separation_json(result.function_summary)},
                                           {"flagged_nodes", result.function.flagged},
                                           {"warnings", result.warnings}});
}

void run_sample(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const Matrix embedding = io::read_numeric_csv(p.input("features")).values;
  const Graph graph = p.has_input("graph") ? io::load_graph(p.input("graph")) : build_knn_graph(embedding, p.knn());
  const auto strategy = parse_sampling_strategy(p.str("strategy"));
  const auto selection = ssl_sample_selection(embedding, graph, static_cast<Index>(p.integer("budget")), strategy,
                                              p.seed(), parse_shift_kind(p.str("operator")));
  out.csv(out.primary, {"rank", "node_id", "score"}, [&](std::ostream& s) { io::write_selection_csv(s, selection); });
}

void run_corrupt_labels(const RunManifest& m, Outputs& out) {
  const Params p{m};
  const auto labels = io::read_labels(p.input("labels"));
  const auto corrupted = corrupt_labels(labels, p.number("beta"), p.seed());
  out.csv(out.primary, {"label"}, [&](std::ostream& s) { io::write_column_csv(s, "label", corrupted.labels); });
  std::vector<int> mask(corrupted.flipped.begin(), corrupted.flipped.end());
  out.csv(out.sibling("flips.csv"), {"flipped"}, [&](std::ostream& s) { io::write_column_csv(s, "flipped", mask); });
}

std::vector<CommandSpec> commands() {
  return {
      {"build-graph",
       "Build a k-NN graph from a feature CSV",
       {{"features", true, "feature CSV"}},
       knn_params(),
       SeedUse::None,
       "graph.edges",
       run_build_graph},
      {"influence",
       "Influence scores of a node signal on a graph",
       {{"graph", true, "edge-list file"}, {"signal", true, "signal CSV (one column, or several for a vector signal)"}},
       {{"operator", ParamType::String, "transition", "adjacency, transition or laplacian"},
        {"method", ParamType::String, "filter", "filter (f - Af) or phop"},
        {"hops", ParamType::Integer, 1, "hop count for the phop method"},
        {"magnitude", ParamType::String, "squared", "squared or absolute"},
        {"normalize", ParamType::Flag, false, "divide scores by their maximum"}},
       SeedUse::None,
       "scores.csv",
       run_influence},
      {"spectrum",
       "Graph Fourier coefficients of a signal",
       {{"graph", true, "edge-list file"}, {"signal", true, "signal CSV"}},
       {{"operator", ParamType::String, "laplacian", "adjacency or laplacian"},
        {"max_nodes", ParamType::Integer, 4096, "cap for the dense eigendecomposition"}},
       SeedUse::None,
       "spectrum.csv",
       run_spectrum},
      {"prototypes",
       "Select prototypes and criticisms with MMD node functions",
       {{"features", true, "feature CSV"},
        {"labels", false, "label CSV (needed for local mode)"},
        {"test_features", false, "held-out features for 1-NN evaluation"},
        {"test_labels", false, "held-out labels for 1-NN evaluation"}},
       with_knn({{"mode", ParamType::String, "global", "global or local"},
                 {"kernel_bandwidth", ParamType::Bandwidth, "median", "RBF bandwidth: median or a value"},
                 {"threshold", ParamType::Number, 50.0, "influence percentile bounding prototype candidates"},
                 {"m_prototypes", ParamType::Integer, 10, "number of prototypes"},
                 {"m_criticisms", ParamType::Integer, 10, "number of criticisms"},
                 {"invert_prototype_order", ParamType::Flag, false, "rank prototypes by decreasing function value"}}),
       SeedUse::None,
       "prototypes.csv",
       run_prototypes},
      {"noisy-labels",
       "Rank samples by how likely their label is corrupted",
       {{"features", true, "feature CSV"},
        {"labels", true, "(possibly corrupted) label CSV"},
        {"flips", false, "0/1 CSV marking planted flips, for recall curves"}},
       with_knn({{"operator", ParamType::String, "transition", "shift operator"},
                 {"budget_step", ParamType::Number, 0.01, "recall curve grid step"}}),
       SeedUse::None,
       "ranking.csv",
       run_noisy_labels},
      {"confusing",
       "Samples most confusing to a model, from latent features",
       {{"features", true, "latent feature CSV"}, {"labels", true, "label CSV"}},
       with_knn({{"operator", ParamType::String, "transition", "shift operator"},
                 {"top_k", ParamType::Integer, 10, "number of samples to return"}}),
       SeedUse::None,
       "confusing.csv",
       run_confusing},
      {"adversarial",
       "Per-sample statistics separating flagged from unflagged samples",
       {{"features", true, "latent feature CSV"},
        {"flags", true, "0/1 CSV marking adversarial samples"},
        {"reference_features", false, "training features (kde)"},
        {"reference_labels", false, "training labels (kde)"},
        {"predicted_labels", false, "predicted class of each sample (kde)"}},
       with_knn({{"function", ParamType::String, "mmd_global", "mmd_global or kde"},
                 {"kernel_bandwidth", ParamType::Bandwidth, "median", "RBF bandwidth: median or a value"},
                 {"bins", ParamType::Integer, 20, "histogram bins"},
                 {"kde_log", ParamType::Flag, false, "use the log density"},
                 {"operator", ParamType::String, "transition", "shift operator"}}),
       SeedUse::None,
       "adversarial.csv",
       run_adversarial},
      {"sample",
       "Select nodes for labeling from an embedding",
       {{"features", true, "embedding CSV"}, {"graph", false, "edge-list file (default: k-NN over the embedding)"}},
       with_knn({{"budget", ParamType::Integer, 10, "number of nodes to select"},
                 {"strategy", ParamType::String, "margin", "margin, resampling or random"},
                 {"operator", ParamType::String, "transition", "shift operator"}}),
       SeedUse::Strategy,
       "sample.csv",
       run_sample},
      {"corrupt-labels",
       "Flip a fraction of binary labels in each class",
       {{"labels", true, "label CSV"}},
       {{"beta", ParamType::Number, 0.1, "fraction of each class to flip"}},
       SeedUse::Required,
       "corrupted_labels.csv",
       run_corrupt_labels},
  };
}

struct CommandOptions {
  std::string manifest;
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
};

RunManifest resolve(const CommandSpec& spec, CLI::App& sub, const CommandOptions& opts) {
  RunManifest m;
  if (!opts.manifest.empty()) {
    m = RunManifest::load(opts.manifest);
    if (m.task != spec.name) {
      throw UsageError("manifest is for task '" + m.task + "', not '" + spec.name + "'");
    }
    for (const auto& [key, value] : m.params.items()) {
      const bool known = std::any_of(spec.params.begin(), spec.params.end(), [&](const auto& ps) { return ps.name == key; });
      if (!known) throw UsageError("manifest parameter '" + key + "' is not accepted by " + spec.name);
    }
    for (const auto& [key, value] : m.inputs.items()) {
      const bool known = std::any_of(spec.inputs.begin(), spec.inputs.end(), [&](const auto& is) { return is.name == key; });
      if (!known) throw UsageError("manifest input '" + key + "' is not accepted by " + spec.name);
      if (!value.is_string()) throw UsageError("manifest input '" + key + "' must be a path string");
    }
  }
  m.task = spec.name;
  m.schemas = json::object();

  json params = json::object();
  for (const auto& ps : spec.params) {
    json value = ps.fallback;
    if (m.params.contains(ps.name)) {
      value = m.params.at(ps.name);
      check_param_type(ps, value);
    }
    const auto flag = flag_name(ps.name);
    if (ps.type == ParamType::Flag) {
      if (sub.count(flag) > 0) value = opts.flags.at(ps.name);
    } else if (sub.count(flag) > 0) {
      value = parse_value(ps, opts.values.at(ps.name));
    }
    params[ps.name] = value;
  }
  m.params = params;

  json inputs = json::object();
  for (const auto& is : spec.inputs) {
    std::string path;
    if (m.inputs.contains(is.name)) path = m.inputs.at(is.name).get<std::string>();
    if (sub.count(flag_name(is.name)) > 0) path = opts.inputs.at(is.name);
    if (path.empty()) {
      if (is.required) throw UsageError(spec.name + ": missing required input " + flag_name(is.name));
      continue;
    }
    inputs[is.name] = path;
  }
  m.inputs = inputs;

  if (opts.seed) m.seed = opts.seed;
  bool needs_seed = spec.seed == SeedUse::Required;
  if (spec.seed == SeedUse::Strategy) needs_seed = m.params.at("strategy").get<std::string>() != "margin";
  if (needs_seed && !m.seed) throw UsageError(spec.name + ": --seed is required for this configuration");
  if (spec.seed == SeedUse::None) m.seed.reset();

  if (!opts.out.empty()) {
    m.output = opts.out;
  } else if (m.output.empty()) {
    const char* dir = std::getenv(kOutputDirEnv);
    m.output = ((dir != nullptr && *dir != '\0') ? fs::path(dir) : fs::path(".")) / spec.default_output;
    m.output = fs::path(m.output).lexically_normal().string();
  }
  return m;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto specs = commands();
  CLI::App app{"Graph-signal influence estimation for interpretability tasks", "margin"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::vector<CommandOptions> options(specs.size());
  std::vector<CLI::App*> subs;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& spec = specs[c];
    auto& opts = options[c];
    auto* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--manifest", opts.manifest, "Run manifest (JSON); explicit flags override it");
    sub->add_option("--out", opts.out,
                    std::string("Primary output file (default: $") + kOutputDirEnv + "/" + spec.default_output + ")");
    sub->add_option("--threads", opts.threads, "Worker threads (1 = serial)")->check(CLI::PositiveNumber);
    if (spec.seed != SeedUse::None) sub->add_option("--seed", opts.seed, "Random seed");
    for (const auto& is : spec.inputs) {
      opts.inputs[is.name];
      sub->add_option(flag_name(is.name), opts.inputs[is.name], is.help);
    }
    for (const auto& ps : spec.params) {
      const std::string help = ps.help + " (default " + ps.fallback.dump() + ")";
      if (ps.type == ParamType::Flag) {
        opts.flags[ps.name] = false;
        sub->add_flag(flag_name(ps.name), opts.flags[ps.name], help);
      } else {
        opts.values[ps.name];
        sub->add_option(flag_name(ps.name), opts.values[ps.name], help);
      }
    }
    subs.push_back(sub);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t c = 0; c < specs.size(); ++c) {
    if (!subs[c]->parsed()) continue;
    const auto& spec = specs[c];
    try {
      const RunManifest manifest = resolve(spec, *subs[c], options[c]);
      const unsigned previous = thread_count();
      set_thread_count(options[c].threads);
      struct Restore {
        unsigned value;
        ~Restore() { set_thread_count(value); }
      } restore{previous};

      Outputs outputs;
      outputs.primary = manifest.output;
      spec.run(manifest, outputs);
      RunManifest resolved = manifest;
      resolved.schemas = outputs.schemas;
      resolved.save(outputs.sibling("manifest.json"));
      return 0;
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n\n" << subs[c]->help();
      return 2;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  err << app.help();
  return 2;
}

}  // namespace margin::cli
