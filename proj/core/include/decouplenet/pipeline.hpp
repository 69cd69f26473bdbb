#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decouplenet/copula.hpp"
#include "decouplenet/net.hpp"
#include "decouplenet/sample.hpp"
#include "decouplenet/spec_strings.hpp"

namespace dcn::pipeline {

enum class TransformKind { decouplenet, rosenblatt };

std::string transform_kind_name(TransformKind kind);
TransformKind transform_kind_from_name(const std::string& name);

// Settings shared by assess and simulation_study. The training seed inside
// `train` is ignored: all randomness derives from the top-level seed of the
// run, so one integer reproduces everything.
struct RunConfig {
    std::vector<int> hidden = {300, 300};
    int d_out = 2;
    net::TrainConfig train;
    Eigen::Index n_gen = 10000;
};

// Complete replication x model grid of scores (no missing cells). The
// benchmark column comes first: the empirical copula for assess, the true
// model for simulation studies. Candidates whose fit failed are dropped from
// the grid and recorded in `failures`.
struct ScoreTable {
    std::vector<std::string> models;
    Eigen::MatrixXd scores; // one row per replication
    std::vector<std::string> meta;     // key=value lines
    std::vector<std::string> failures; // "label: reason"

    double median_of(std::size_t model_index) const;
    std::size_t best_by_median() const;
    std::size_t worst_by_median() const;
};

struct ModelSamples {
    std::string model;
    Sample generated;   // n_gen x d, model (input) space; drives the colors
    Sample transformed; // n_gen x d_out
};

struct AssessResult {
    ScoreTable table; // one row; benchmark first, then ascending score
    std::vector<ModelSamples> samples;
    net::NetConfig net_config;
    net::NetWeights net;
};

// Single-dataset workflow: pseudo-observations, candidate fitting, one net
// trained on the data, then per model (always including the empirical-copula
// benchmark, sampled by row resampling) generate, transform and score. When
// the configured batch size does not divide n, training falls back to full
// batches (n_batch = n). Fit failures are recorded and skipped.
AssessResult assess(const Eigen::MatrixXd& data, const std::vector<spec::Candidate>& candidates,
                    const RunConfig& config, std::uint64_t seed);

// Replicated study: per replication, sample n_trn from the true model, build
// pseudo-observations, train the net on them (or use the true model's exact
// conditional transform when kind == rosenblatt), then score the true model
// and every candidate on fresh generator streams. Fitted candidates are
// re-fitted per replication from that replication's pseudo-observations.
ScoreTable simulation_study(const copula::CopulaSpec& true_spec,
                            const std::vector<spec::Candidate>& candidates, int replications,
                            Eigen::Index n_trn, const RunConfig& config, std::uint64_t seed,
                            TransformKind kind);

// Versioned text persistence for trained nets; save -> load -> save is
// byte-identical.
void save_net(const std::string& path, const net::NetConfig& config, const net::NetWeights& w);

struct LoadedNet {
    net::NetConfig config;
    net::NetWeights weights;
};

LoadedNet load_net(const std::string& path);

// Long-format CSV (replication,model,score) plus a key=value sidecar at
// path + ".meta" carrying the run metadata and any fit failures.
void save_score_table(const std::string& csv_path, const ScoreTable& table);
ScoreTable load_score_table(const std::string& csv_path);

} // namespace dcn::pipeline
