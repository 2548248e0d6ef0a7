#include "ibci/initializers.hpp"

#include "ibci/rng.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ibci {

namespace {

const char* base_name(BaseInit base) {
    return base == BaseInit::kXavier ? "xavier" : "he";
}

const char* kind_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::kVanilla: return "vanilla";
        case StrategyKind::kLsuv: return "lsuv";
        case StrategyKind::kIbci: return "ibci";
        case StrategyKind::kTieOnly: return "tie_only";
        case StrategyKind::kIimOnly: return "iim_only";
    }
    return "?";
}

bool uses_campaign(StrategyKind kind) {
    return kind == StrategyKind::kIbci || kind == StrategyKind::kTieOnly ||
           kind == StrategyKind::kIimOnly;
}

}  // namespace

std::string strategy_id(const InitStrategy& s) {
    std::string id = std::string(kind_name(s.kind)) + "-" + base_name(s.base);
    if (uses_campaign(s.kind)) id += "-k" + std::to_string(s.k);
    return id;
}

std::string strategy_descriptor(const InitStrategy& s) {
    std::ostringstream out;
    out << kind_name(s.kind) << "(base=" << base_name(s.base);
    if (uses_campaign(s.kind)) {
        out << ",k=" << s.k << ",subset=" << s.scoring_subset << ",alpha=[";
        for (std::size_t i = 0; i < s.alpha.per_layer.size(); ++i)
            out << (i ? "," : "") << s.alpha.per_layer[i];
        out << "]";
    }
    if (s.kind == StrategyKind::kLsuv)
        out << ",tol=" << s.lsuv_tol << ",max_iter=" << s.lsuv_max_iter;
    out << ")";
    return out.str();
}

Eigen::MatrixXd xavier_init(Eigen::Index fan_in, Eigen::Index fan_out,
                            std::uint64_t seed) {
    return generate_candidates(BaseInit::kXavier, fan_in, fan_out, 1, seed,
                               /*equalize_norms=*/false)
        .weights;
}

Eigen::MatrixXd he_init(Eigen::Index fan_in, Eigen::Index fan_out,
                        std::uint64_t seed) {
    return generate_candidates(BaseInit::kHe, fan_in, fan_out, 1, seed,
                               /*equalize_norms=*/false)
        .weights;
}

Mlp vanilla_init(const NetworkSpec& spec, BaseInit base, std::uint64_t seed) {
    spec.validate();
    const std::size_t depth = spec.depth();
    Mlp mlp;
    mlp.weights.reserve(depth);
    mlp.biases.reserve(depth);
    for (std::size_t i = 1; i <= depth; ++i) {
        const Eigen::Index fan_in = spec.widths[i - 1];
        const Eigen::Index fan_out = spec.widths[i];
        const std::uint64_t layer_seed = derive_seed(seed, i);
        mlp.weights.push_back(base == BaseInit::kXavier
                                  ? xavier_init(fan_in, fan_out, layer_seed)
                                  : he_init(fan_in, fan_out, layer_seed));
        mlp.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return mlp;
}

LsuvReport lsuv_rescale(Mlp& mlp, const Dataset& ds, double tol, int max_iter) {
    if (tol <= 0.0) throw std::invalid_argument("lsuv_rescale: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("lsuv_rescale: max_iter must be >= 1");
    mlp.validate();
    if (ds.dim() != mlp.weights.front().rows())
        throw std::invalid_argument("lsuv_rescale: dataset dimension mismatch");

    const std::size_t depth = mlp.depth();
    LsuvReport report;
    report.variances.resize(depth);
    report.rescales.assign(depth, 0);

    Eigen::MatrixXd z = ds.features;
    Eigen::MatrixXd pre;
    for (std::size_t i = 0; i < depth; ++i) {
        double var = 0.0;
        for (int iter = 0; iter <= max_iter; ++iter) {
            pre.noalias() = z * mlp.weights[i];
            pre.rowwise() += mlp.biases[i].transpose();
            const double mean = pre.mean();
            var = (pre.array() - mean).square().sum() /
                  static_cast<double>(pre.size());
            if (var <= 0.0)
                throw std::runtime_error("lsuv_rescale: dead layer " +
                                         std::to_string(i + 1) +
                                         " (zero output variance)");
            if (std::abs(var - 1.0) <= tol || iter == max_iter) break;
            mlp.weights[i] /= std::sqrt(var);
            ++report.rescales[i];
        }
        report.variances[i] = var;
        if (i + 1 < depth) z = pre.cwiseMax(0.0);
    }
    return report;
}

Mlp ibci_init(const NetworkSpec& spec, const Dataset& ds,
              const InitStrategy& strategy, std::uint64_t seed) {
    if (!uses_campaign(strategy.kind))
        throw std::invalid_argument("ibci_init: strategy must be ibci, tie_only or iim_only");
    spec.validate();
    if (ds.size() == 0) throw std::invalid_argument("ibci_init: empty dataset");
    if (spec.widths.front() != ds.dim())
        throw std::invalid_argument("ibci_init: input width " +
                                    std::to_string(spec.widths.front()) +
                                    " != dataset dimension " + std::to_string(ds.dim()));

    const std::size_t depth = spec.depth();
    AlphaSchedule alpha;
    switch (strategy.kind) {
        case StrategyKind::kTieOnly: alpha = AlphaSchedule::constant(0.0, depth); break;
        case StrategyKind::kIimOnly: alpha = AlphaSchedule::constant(1.0, depth); break;
        default:
            alpha = strategy.alpha.per_layer.empty()
                        ? AlphaSchedule::linear(0.9, 0.1, depth)
                        : strategy.alpha;
            alpha.validate();
            if (alpha.depth() != depth)
                throw std::invalid_argument("ibci_init: alpha schedule has " +
                                            std::to_string(alpha.depth()) +
                                            " entries for a depth-" +
                                            std::to_string(depth) + " network");
    }

    const Dataset subset =
        subsample(ds, strategy.scoring_subset, derive_seed(seed, stream::kScoringSubset));
    const ClassPartition part = partition(subset);

    Mlp mlp;
    mlp.weights.reserve(depth);
    mlp.biases.reserve(depth);

    Eigen::MatrixXd z = subset.features;
    Eigen::MatrixXd cand_acts;
    for (std::size_t i = 1; i <= depth; ++i) {
        const Eigen::Index fan_in = spec.widths[i - 1];
        const Eigen::Index d_out = spec.widths[i];
        const bool hidden = i < depth;

        const CandidateSet cands =
            generate_candidates(strategy.base, fan_in, d_out, strategy.k,
                                derive_seed(seed, i), strategy.equalize_norms);

        cand_acts.noalias() = z * cands.weights;
        if (hidden && !strategy.score_preactivation)
            cand_acts = cand_acts.cwiseMax(0.0);

        const Eigen::VectorXd iim = iim_scores(cand_acts);
        const Eigen::VectorXd tie = tie_scores(cand_acts, part, strategy.tie_centering,
                                               strategy.tie_class_size_norm);
        const Eigen::VectorXd scores =
            combine_scores(iim, tie, alpha.per_layer[i - 1]);

        mlp.weights.push_back(campaign_select(cands, scores, d_out, strategy.tau));
        mlp.biases.push_back(Eigen::VectorXd::Zero(d_out));

        Eigen::MatrixXd next;
        next.noalias() = z * mlp.weights.back();
        if (hidden) {
            next = next.cwiseMax(0.0);
            if (next.maxCoeff() <= 0.0)
                throw std::runtime_error("ibci_init: layer " + std::to_string(i) +
                                         " is all-dead (every ReLU output is zero)");
        }
        z = std::move(next);
    }
    return mlp;
}

Mlp init_network(const NetworkSpec& spec, const Dataset& ds,
                 const InitStrategy& strategy, std::uint64_t seed) {
    switch (strategy.kind) {
        case StrategyKind::kVanilla:
            return vanilla_init(spec, strategy.base, seed);
        case StrategyKind::kLsuv: {
            Mlp mlp = vanilla_init(spec, strategy.base, seed);
            const Dataset batch = subsample(
                ds, std::min<Eigen::Index>(strategy.scoring_subset, ds.size()),
                derive_seed(seed, stream::kScoringSubset));
            lsuv_rescale(mlp, batch, strategy.lsuv_tol, strategy.lsuv_max_iter);
            return mlp;
        }
        default:
            return ibci_init(spec, ds, strategy, seed);
    }
}

namespace {

void write_u32(std::ofstream& f, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ofstream& f, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    f.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ofstream& f, double v) {
    write_u64(f, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t read_u32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("load_weights: truncated file " + path);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

std::uint64_t read_u64(std::ifstream& f, const std::string& path) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (!f) throw std::runtime_error("load_weights: truncated file " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

double read_f64(std::ifstream& f, const std::string& path) {
    return std::bit_cast<double>(read_u64(f, path));
}

constexpr char kWeightsMagic[8] = {'I', 'B', 'C', 'I', 'W', 'T', 'S', '1'};

}  // namespace

void save_weights(const std::string& path, const Mlp& mlp,
                  const std::string& strategy_desc, std::uint64_t seed) {
    mlp.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_weights: cannot open " + path);

    f.write(kWeightsMagic, 8);
    const NetworkSpec spec = mlp.spec();
    write_u32(f, static_cast<std::uint32_t>(mlp.depth()));
    for (Eigen::Index w : spec.widths) write_u32(f, static_cast<std::uint32_t>(w));
    write_u64(f, seed);
    write_u32(f, static_cast<std::uint32_t>(strategy_desc.size()));
    f.write(strategy_desc.data(),
            static_cast<std::streamsize>(strategy_desc.size()));

    for (std::size_t i = 0; i < mlp.depth(); ++i) {
        const Eigen::MatrixXd& w = mlp.weights[i];
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) write_f64(f, w(r, c));
        for (Eigen::Index r = 0; r < mlp.biases[i].size(); ++r)
            write_f64(f, mlp.biases[i][r]);
    }
    if (!f) throw std::runtime_error("save_weights: write failed on " + path);
}

WeightDump load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_weights: cannot open " + path);

    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kWeightsMagic, 8) != 0)
        throw std::runtime_error("load_weights: bad magic in " + path);

    const std::uint32_t depth = read_u32(f, path);
    if (depth == 0 || depth > 1024)
        throw std::runtime_error("load_weights: implausible depth in " + path);
    std::vector<Eigen::Index> widths(depth + 1);
    for (auto& w : widths) w = static_cast<Eigen::Index>(read_u32(f, path));

    WeightDump dump;
    dump.seed = read_u64(f, path);
    const std::uint32_t desc_len = read_u32(f, path);
    dump.strategy.resize(desc_len);
    f.read(dump.strategy.data(), desc_len);
    if (!f) throw std::runtime_error("load_weights: truncated file " + path);

    for (std::uint32_t i = 0; i < depth; ++i) {
        Eigen::MatrixXd w(widths[i], widths[i + 1]);
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = read_f64(f, path);
        Eigen::VectorXd b(widths[i + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = read_f64(f, path);
        dump.mlp.weights.push_back(std::move(w));
        dump.mlp.biases.push_back(std::move(b));
    }
    dump.mlp.validate();
    return dump;
}

}  // namespace ibci
