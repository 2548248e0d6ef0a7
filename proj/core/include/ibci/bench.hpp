#pragma once

// Config-driven experiment harness.
//
// A config names a dataset, an architecture, an init strategy, the training
// protocol and a list of run seeds. Each seed drives one fully deterministic
// run: the seed fans out into per-layer init streams and the per-epoch
// shuffle stream, so re-running a config reproduces every CSV byte for
// byte. Wall-clock timings go to their own file (timings.csv) and are the
// only non-reproducible output.

#include "ibci/dataset.hpp"
#include "ibci/initializers.hpp"
#include "ibci/network.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace ibci {

struct DatasetSpec {
    enum class Kind { kMnist, kSynthetic };
    Kind kind = Kind::kMnist;

    // mnist: directory holding the four IDX files.
    std::string dir = "data/mnist";
    bool scale01 = true;
    Eigen::Index train_subset = 0;  // 0 keeps the full training split
    std::uint64_t subset_seed = 20240101;

    // synthetic: Gaussian class blobs with randomly drawn means.
    int n_classes = 10;
    Eigen::Index dim = 784;
    Eigen::Index n_per_class = 500;
    Eigen::Index test_n_per_class = 100;
    double stddev = 1.0;
    double mean_scale = 1.0;
    std::uint64_t seed = 7;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::vector<Eigen::Index> arch;
    InitStrategy init;
    TrainConfig train;  // shuffle_seed is ignored; each run derives its own
    std::vector<std::uint64_t> seeds = {1};
    std::string output_dir = "out";

    // alpha-search section; zero/empty fields fall back to the main protocol.
    int alpha_trials = 10;
    std::uint64_t alpha_seed = 1;
    int alpha_epochs = 0;
    std::vector<std::uint64_t> alpha_seeds;

    void validate() const;
    std::string arch_id() const;  // e.g. "784-256-100-10"
};

// Parses a JSON config file, applying `--set`-style dotted-path overrides
// (e.g. "train.epochs=5", "seeds=[1,2]") on top. Unknown keys anywhere are
// rejected. Throws std::invalid_argument with a diagnostic.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

struct DataBundle {
    Dataset train;
    Dataset test;
};

// Materializes the config's dataset (loads the IDX pair or synthesizes the
// Gaussian blobs, then applies train_subset) and checks it against arch.
DataBundle load_data(const ExperimentConfig& cfg);

// The config's strategy with scoring_subset clamped to the training size.
InitStrategy effective_strategy(const ExperimentConfig& cfg, Eigen::Index train_size);

struct RunRecord {
    std::uint64_t seed = 0;
    double min_error = 0.0;
    int argmin_epoch = 0;
    double init_seconds = 0.0;
    Metrics metrics;
};

struct SummaryRow {
    std::string strategy;
    std::string arch;
    std::vector<RunRecord> runs;
    double mean_min_error = 0.0;
    double std_min_error = 0.0;  // population stddev over seeds
    double mean_argmin_epoch = 0.0;
};

SummaryRow summarize(const std::string& strategy, const std::string& arch,
                     std::vector<RunRecord> runs);

// Owns the output CSVs of one harness invocation. Construction truncates
// epochs.csv, runs.csv, summary.csv and timings.csv under `dir` (created if
// missing); rows are flushed as they are written so failed runs leave
// partial results behind.
class CsvSink {
public:
    explicit CsvSink(const std::string& dir);

    void epoch_row(const std::string& run_id, std::uint64_t seed, int epoch,
                   double train_loss, double test_error);
    void run_row(const std::string& run_id, const SummaryRow& row,
                 const RunRecord& run);
    void summary_row(const std::string& run_id, const SummaryRow& row);
    void timing_row(const std::string& run_id, const SummaryRow& row,
                    const RunRecord& run);

    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::ofstream epochs_, runs_, summary_, timings_;
};

// Runs one seed: initialize per the strategy (timed), train, evaluate.
RunRecord run_single(const ExperimentConfig& cfg, const DataBundle& data,
                     const InitStrategy& strategy, std::uint64_t seed);

// Full experiment over cfg.seeds with the given data, writing into sink.
// `tag` (when non-empty) prefixes the run id, keeping alpha-search trials
// apart. A failing seed raises a runtime error naming the seed and phase;
// rows of completed runs are already on disk.
SummaryRow run_experiment(const ExperimentConfig& cfg, const DataBundle& data,
                          CsvSink& sink, const std::string& tag = "");

// Convenience wrapper: load data, open sink at cfg.output_dir, run.
SummaryRow run_experiment(const ExperimentConfig& cfg);

// Runs ibci, tie_only and iim_only with shared seeds (hence shared per-layer
// candidate banks); the configured strategy's kind is ignored.
std::vector<SummaryRow> run_ablation(const ExperimentConfig& cfg);
std::vector<SummaryRow> run_ablation(const ExperimentConfig& cfg,
                                     const DataBundle& data, CsvSink& sink);

struct AlphaSearchResult {
    AlphaSchedule best;
    SummaryRow best_row;
    int best_trial = 0;
};

// Uniform random search over per-layer alpha in [0,1]: n_trials schedules,
// each evaluated with run_experiment under the (possibly reduced)
// alpha-search protocol. The full trial log lands in trials.csv.
AlphaSearchResult alpha_search(const ExperimentConfig& cfg, int n_trials,
                               std::uint64_t search_seed);
AlphaSearchResult alpha_search(const ExperimentConfig& cfg, const DataBundle& data,
                               CsvSink& sink, int n_trials,
                               std::uint64_t search_seed);

// Shortest representation that round-trips a double (CSV cells).
std::string csv_double(double v);

}  // namespace ibci
