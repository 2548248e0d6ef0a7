#include "ibci/bench.hpp"

#include "ibci/idx.hpp"
#include "ibci/rng.hpp"

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"  // vendored single header
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace ibci {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (arch.size() < 2)
        throw std::invalid_argument("config: arch needs at least [input, output] widths");
    for (Eigen::Index w : arch)
        if (w < 1) throw std::invalid_argument("config: arch widths must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
    if (train.learning_rate <= 0.0)
        throw std::invalid_argument("config: learning_rate must be > 0");
    if (train.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (train.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (!init.alpha.per_layer.empty() && init.alpha.per_layer.size() != arch.size() - 1)
        throw std::invalid_argument("config: alpha schedule length must equal layer count");
}

std::string ExperimentConfig::arch_id() const {
    std::string id;
    for (std::size_t i = 0; i < arch.size(); ++i)
        id += (i ? "-" : "") + std::to_string(arch[i]);
    return id;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

void require_keys(const json& obj, const char* section,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok)
            throw std::invalid_argument(std::string("config: unknown key '") + key +
                                        "' in " + section);
    }
}

std::uint64_t as_seed(const json& v, const char* what) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw std::invalid_argument(std::string("config: ") + what + " must be an integer");
    return v.template get<std::uint64_t>();
}

DatasetSpec parse_dataset(const json& j) {
    require_keys(j, "dataset",
                 {"kind", "dir", "scale01", "train_subset", "subset_seed", "n_classes",
                  "dim", "n_per_class", "test_n_per_class", "stddev", "mean_scale",
                  "seed"});
    DatasetSpec ds;
    const std::string kind = j.value("kind", "mnist");
    if (kind == "mnist") ds.kind = DatasetSpec::Kind::kMnist;
    else if (kind == "synthetic") ds.kind = DatasetSpec::Kind::kSynthetic;
    else throw std::invalid_argument("config: dataset.kind must be mnist or synthetic");
    ds.dir = j.value("dir", ds.dir);
    ds.scale01 = j.value("scale01", ds.scale01);
    ds.train_subset = j.value("train_subset", static_cast<long>(ds.train_subset));
    if (j.contains("subset_seed")) ds.subset_seed = as_seed(j["subset_seed"], "subset_seed");
    ds.n_classes = j.value("n_classes", ds.n_classes);
    ds.dim = j.value("dim", static_cast<long>(ds.dim));
    ds.n_per_class = j.value("n_per_class", static_cast<long>(ds.n_per_class));
    ds.test_n_per_class = j.value("test_n_per_class", static_cast<long>(ds.test_n_per_class));
    ds.stddev = j.value("stddev", ds.stddev);
    ds.mean_scale = j.value("mean_scale", ds.mean_scale);
    if (j.contains("seed")) ds.seed = as_seed(j["seed"], "dataset.seed");
    return ds;
}

AlphaSchedule parse_alpha(const json& j, std::size_t depth) {
    AlphaSchedule alpha;
    if (j.is_array()) {
        for (const auto& v : j) alpha.per_layer.push_back(v.template get<double>());
    } else if (j.is_object()) {
        require_keys(j, "init.alpha", {"front", "back"});
        alpha = AlphaSchedule::linear(j.at("front").template get<double>(),
                                      j.at("back").template get<double>(), depth);
    } else {
        throw std::invalid_argument(
            "config: init.alpha must be an array or {front, back}");
    }
    alpha.validate();
    return alpha;
}

InitStrategy parse_init(const json& j, std::size_t depth) {
    require_keys(j, "init",
                 {"strategy", "base", "k", "alpha", "scoring_subset", "equalize_norms",
                  "tie_centering", "tie_class_size_norm", "score_preactivation", "tau",
                  "lsuv_tol", "lsuv_max_iter"});
    InitStrategy st;
    const std::string kind = j.value("strategy", "vanilla");
    if (kind == "vanilla") st.kind = StrategyKind::kVanilla;
    else if (kind == "lsuv") st.kind = StrategyKind::kLsuv;
    else if (kind == "ibci") st.kind = StrategyKind::kIbci;
    else if (kind == "tie_only") st.kind = StrategyKind::kTieOnly;
    else if (kind == "iim_only") st.kind = StrategyKind::kIimOnly;
    else throw std::invalid_argument("config: unknown init.strategy '" + kind + "'");

    const std::string base = j.value("base", "xavier");
    if (base == "xavier") st.base = BaseInit::kXavier;
    else if (base == "he") st.base = BaseInit::kHe;
    else throw std::invalid_argument("config: init.base must be xavier or he");

    st.k = j.value("k", st.k);
    if (st.k < 1) throw std::invalid_argument("config: init.k must be >= 1");
    if (j.contains("alpha")) st.alpha = parse_alpha(j["alpha"], depth);
    st.scoring_subset = j.value("scoring_subset", static_cast<long>(st.scoring_subset));
    st.equalize_norms = j.value("equalize_norms", st.equalize_norms);
    const std::string centering = j.value("tie_centering", "per_class");
    if (centering == "per_class") st.tie_centering = TieCentering::kPerClass;
    else if (centering == "global") st.tie_centering = TieCentering::kGlobal;
    else throw std::invalid_argument("config: tie_centering must be per_class or global");
    st.tie_class_size_norm = j.value("tie_class_size_norm", st.tie_class_size_norm);
    st.score_preactivation = j.value("score_preactivation", st.score_preactivation);
    st.tau = j.value("tau", st.tau);
    st.lsuv_tol = j.value("lsuv_tol", st.lsuv_tol);
    st.lsuv_max_iter = j.value("lsuv_max_iter", st.lsuv_max_iter);
    return st;
}

// Applies one "a.b.c=value" override; the value is parsed as JSON when it
// parses, and kept as a string otherwise.
void apply_override(json& root, const std::string& setting) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("config: --set expects key=value, got '" + setting + "'");
    const std::string path = setting.substr(0, eq);
    const std::string raw = setting.substr(eq + 1);

    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;

    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty())
            throw std::invalid_argument("config: empty key segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

}  // namespace

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open file " + path);
    json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
        throw std::invalid_argument("config: " + path + " is not valid JSON");

    for (const auto& setting : overrides) apply_override(j, setting);

    require_keys(j, "config root",
                 {"dataset", "arch", "init", "train", "seeds", "output_dir",
                  "alpha_search"});

    ExperimentConfig cfg;
    if (!j.contains("arch") || !j["arch"].is_array())
        throw std::invalid_argument("config: arch array is required");
    for (const auto& w : j["arch"])
        cfg.arch.push_back(w.template get<Eigen::Index>());

    if (j.contains("dataset")) cfg.dataset = parse_dataset(j["dataset"]);
    if (j.contains("init")) cfg.init = parse_init(j["init"], cfg.arch.size() - 1);

    if (j.contains("train")) {
        const json& t = j["train"];
        require_keys(t, "train", {"learning_rate", "batch_size", "epochs"});
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.batch_size = t.value("batch_size", static_cast<long>(cfg.train.batch_size));
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    }

    if (j.contains("seeds")) {
        cfg.seeds.clear();
        for (const auto& s : j["seeds"]) cfg.seeds.push_back(as_seed(s, "seeds[]"));
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);

    if (j.contains("alpha_search")) {
        const json& a = j["alpha_search"];
        require_keys(a, "alpha_search", {"n_trials", "seed", "epochs", "seeds"});
        cfg.alpha_trials = a.value("n_trials", cfg.alpha_trials);
        if (a.contains("seed")) cfg.alpha_seed = as_seed(a["seed"], "alpha_search.seed");
        cfg.alpha_epochs = a.value("epochs", cfg.alpha_epochs);
        if (a.contains("seeds"))
            for (const auto& s : a["seeds"])
                cfg.alpha_seeds.push_back(as_seed(s, "alpha_search.seeds[]"));
    }

    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Data resolution
// ---------------------------------------------------------------------------

DataBundle load_data(const ExperimentConfig& cfg) {
    DataBundle data;
    const DatasetSpec& spec = cfg.dataset;
    if (spec.kind == DatasetSpec::Kind::kMnist) {
        data.train = load_mnist_idx(spec.dir + "/train-images-idx3-ubyte",
                                    spec.dir + "/train-labels-idx1-ubyte", spec.scale01);
        data.test = load_mnist_idx(spec.dir + "/t10k-images-idx3-ubyte",
                                   spec.dir + "/t10k-labels-idx1-ubyte", spec.scale01);
    } else {
        Rng means_rng(derive_seed(spec.seed, 0));
        std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(spec.n_classes));
        for (auto& mu : means) {
            mu.resize(spec.dim);
            for (Eigen::Index q = 0; q < spec.dim; ++q)
                mu[q] = spec.mean_scale * means_rng.normal();
        }
        data.train = synth_gaussians(means, spec.stddev, spec.n_per_class,
                                     derive_seed(spec.seed, 1));
        data.test = synth_gaussians(means, spec.stddev, spec.test_n_per_class,
                                    derive_seed(spec.seed, 2));
    }

    if (spec.train_subset > 0 && spec.train_subset < data.train.size())
        data.train = subsample(data.train, spec.train_subset, spec.subset_seed);

    if (cfg.arch.front() != data.train.dim())
        throw std::invalid_argument("config: arch input width " +
                                    std::to_string(cfg.arch.front()) +
                                    " != dataset dimension " +
                                    std::to_string(data.train.dim()));
    if (cfg.arch.back() != data.train.n_classes)
        throw std::invalid_argument("config: arch output width " +
                                    std::to_string(cfg.arch.back()) +
                                    " != class count " +
                                    std::to_string(data.train.n_classes));
    return data;
}

InitStrategy effective_strategy(const ExperimentConfig& cfg, Eigen::Index train_size) {
    InitStrategy st = cfg.init;
    st.scoring_subset = std::min(st.scoring_subset, train_size);
    return st;
}

// ---------------------------------------------------------------------------
// Runs and aggregation
// ---------------------------------------------------------------------------

std::string csv_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SummaryRow summarize(const std::string& strategy, const std::string& arch,
                     std::vector<RunRecord> runs) {
    SummaryRow row;
    row.strategy = strategy;
    row.arch = arch;
    row.runs = std::move(runs);
    const auto n = static_cast<double>(row.runs.size());
    for (const RunRecord& r : row.runs) {
        row.mean_min_error += r.min_error;
        row.mean_argmin_epoch += r.argmin_epoch;
    }
    row.mean_min_error /= n;
    row.mean_argmin_epoch /= n;
    double var = 0.0;
    for (const RunRecord& r : row.runs) {
        const double d = r.min_error - row.mean_min_error;
        var += d * d;
    }
    row.std_min_error = std::sqrt(var / n);
    return row;
}

CsvSink::CsvSink(const std::string& dir) : dir_(dir) {
    std::filesystem::create_directories(dir);
    const auto open = [&](std::ofstream& f, const char* name, const char* header) {
        f.open(dir + "/" + name, std::ios::trunc);
        if (!f) throw std::runtime_error(std::string("CsvSink: cannot open ") + dir + "/" + name);
        f << header << "\n";
    };
    open(epochs_, "epochs.csv", "run_id,seed,epoch,train_loss,test_error");
    open(runs_, "runs.csv", "run_id,strategy,arch,seed,min_error,argmin_epoch");
    open(summary_, "summary.csv",
         "run_id,strategy,arch,n_seeds,mean_min_error,std_min_error,mean_argmin_epoch");
    open(timings_, "timings.csv", "run_id,strategy,arch,seed,init_seconds");
}

void CsvSink::epoch_row(const std::string& run_id, std::uint64_t seed, int epoch,
                        double train_loss, double test_error) {
    epochs_ << run_id << ',' << seed << ',' << epoch << ',' << csv_double(train_loss)
            << ',' << csv_double(test_error) << '\n';
}

void CsvSink::run_row(const std::string& run_id, const SummaryRow& row,
                      const RunRecord& run) {
    runs_ << run_id << ',' << row.strategy << ',' << row.arch << ',' << run.seed << ','
          << csv_double(run.min_error) << ',' << run.argmin_epoch << '\n';
    runs_.flush();
    epochs_.flush();
}

void CsvSink::summary_row(const std::string& run_id, const SummaryRow& row) {
    summary_ << run_id << ',' << row.strategy << ',' << row.arch << ','
             << row.runs.size() << ',' << csv_double(row.mean_min_error) << ','
             << csv_double(row.std_min_error) << ','
             << csv_double(row.mean_argmin_epoch) << '\n';
    summary_.flush();
}

void CsvSink::timing_row(const std::string& run_id, const SummaryRow& row,
                         const RunRecord& run) {
    timings_ << run_id << ',' << row.strategy << ',' << row.arch << ',' << run.seed
             << ',' << csv_double(run.init_seconds) << '\n';
    timings_.flush();
}

RunRecord run_single(const ExperimentConfig& cfg, const DataBundle& data,
                     const InitStrategy& strategy, std::uint64_t seed) {
    NetworkSpec spec;
    spec.widths = cfg.arch;

    RunRecord rec;
    rec.seed = seed;

    Mlp mlp;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        mlp = init_network(spec, data.train, strategy, seed);
        const auto t1 = std::chrono::steady_clock::now();
        rec.init_seconds = std::chrono::duration<double>(t1 - t0).count();
    } catch (const std::exception& e) {
        throw std::runtime_error("run failed: seed " + std::to_string(seed) +
                                 ", phase init: " + e.what());
    }

    try {
        TrainConfig tc = cfg.train;
        tc.shuffle_seed = derive_seed(seed, stream::kShuffle);
        rec.metrics = train(mlp, data.train, data.test, tc);
    } catch (const std::exception& e) {
        throw std::runtime_error("run failed: seed " + std::to_string(seed) +
                                 ", phase train: " + e.what());
    }
    rec.min_error = rec.metrics.min_error;
    rec.argmin_epoch = rec.metrics.argmin_epoch;
    return rec;
}

namespace {

std::string make_run_id(const std::string& tag, const std::string& strategy,
                        const std::string& arch) {
    return (tag.empty() ? "" : tag + ":") + strategy + "@" + arch;
}

}  // namespace

SummaryRow run_experiment(const ExperimentConfig& cfg, const DataBundle& data,
                          CsvSink& sink, const std::string& tag) {
    cfg.validate();
    const InitStrategy strategy = effective_strategy(cfg, data.train.size());
    const std::string sid = strategy_id(strategy);
    const std::string arch = cfg.arch_id();
    const std::string run_id = make_run_id(tag, sid, arch);

    std::vector<RunRecord> runs;
    runs.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
        RunRecord rec = run_single(cfg, data, strategy, seed);
        for (std::size_t e = 0; e < rec.metrics.test_error.size(); ++e)
            sink.epoch_row(run_id, seed, static_cast<int>(e + 1),
                           rec.metrics.train_loss[e], rec.metrics.test_error[e]);
        runs.push_back(std::move(rec));
    }

    SummaryRow row = summarize(sid, arch, std::move(runs));
    for (const RunRecord& rec : row.runs) {
        sink.run_row(run_id, row, rec);
        sink.timing_row(run_id, row, rec);
    }
    sink.summary_row(run_id, row);
    return row;
}

SummaryRow run_experiment(const ExperimentConfig& cfg) {
    const DataBundle data = load_data(cfg);
    CsvSink sink(cfg.output_dir);
    return run_experiment(cfg, data, sink);
}

std::vector<SummaryRow> run_ablation(const ExperimentConfig& cfg,
                                     const DataBundle& data, CsvSink& sink) {
    std::vector<SummaryRow> rows;
    for (StrategyKind kind :
         {StrategyKind::kIbci, StrategyKind::kTieOnly, StrategyKind::kIimOnly}) {
        ExperimentConfig mode = cfg;
        mode.init.kind = kind;
        rows.push_back(run_experiment(mode, data, sink));
    }
    return rows;
}

std::vector<SummaryRow> run_ablation(const ExperimentConfig& cfg) {
    const DataBundle data = load_data(cfg);
    CsvSink sink(cfg.output_dir);
    return run_ablation(cfg, data, sink);
}

AlphaSearchResult alpha_search(const ExperimentConfig& cfg, const DataBundle& data,
                               CsvSink& sink, int n_trials,
                               std::uint64_t search_seed) {
    if (n_trials < 1) throw std::invalid_argument("alpha_search: n_trials must be >= 1");

    ExperimentConfig trial_cfg = cfg;
    trial_cfg.init.kind = StrategyKind::kIbci;
    if (cfg.alpha_epochs > 0) trial_cfg.train.epochs = cfg.alpha_epochs;
    if (!cfg.alpha_seeds.empty()) trial_cfg.seeds = cfg.alpha_seeds;
    const std::size_t depth = cfg.arch.size() - 1;

    std::ofstream trials(sink.dir() + "/trials.csv", std::ios::trunc);
    if (!trials)
        throw std::runtime_error("alpha_search: cannot open " + sink.dir() + "/trials.csv");
    trials << "trial,alpha,mean_min_error,std_min_error,mean_argmin_epoch\n";

    AlphaSearchResult result;
    for (int t = 0; t < n_trials; ++t) {
        Rng rng(derive_seed(derive_seed(search_seed, stream::kAlphaSearch),
                            static_cast<std::uint64_t>(t)));
        AlphaSchedule schedule;
        schedule.per_layer.resize(depth);
        for (double& a : schedule.per_layer) a = rng.uniform();

        trial_cfg.init.alpha = schedule;
        char tag[16];
        std::snprintf(tag, sizeof tag, "t%03d", t);
        const SummaryRow row = run_experiment(trial_cfg, data, sink, tag);

        std::string alpha_str;
        for (std::size_t i = 0; i < depth; ++i)
            alpha_str += (i ? ";" : "") + csv_double(schedule.per_layer[i]);
        trials << t << ',' << alpha_str << ',' << csv_double(row.mean_min_error) << ','
               << csv_double(row.std_min_error) << ','
               << csv_double(row.mean_argmin_epoch) << '\n';
        trials.flush();

        if (t == 0 || row.mean_min_error < result.best_row.mean_min_error) {
            result.best = schedule;
            result.best_row = row;
            result.best_trial = t;
        }
    }
    return result;
}

AlphaSearchResult alpha_search(const ExperimentConfig& cfg, int n_trials,
                               std::uint64_t search_seed) {
    const DataBundle data = load_data(cfg);
    CsvSink sink(cfg.output_dir);
    return alpha_search(cfg, data, sink, n_trials, search_seed);
}

}  // namespace ibci
