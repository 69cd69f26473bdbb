#include "decouplenet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>

#include "decouplenet/csv.hpp"
#include "decouplenet/empirical.hpp"
#include "decouplenet/errors.hpp"
#include "decouplenet/format.hpp"
#include "decouplenet/rosenblatt.hpp"

namespace dcn::pipeline {

std::string transform_kind_name(TransformKind kind) {
    return kind == TransformKind::decouplenet ? "decouplenet" : "rosenblatt";
}

TransformKind transform_kind_from_name(const std::string& name) {
    if (name == "decouplenet")
        return TransformKind::decouplenet;
    if (name == "rosenblatt")
        return TransformKind::rosenblatt;
    throw DomainError("transform kind must be 'decouplenet' or 'rosenblatt', got '" + name + "'");
}

double ScoreTable::median_of(std::size_t model_index) const {
    if (model_index >= models.size())
        throw DomainError("score table: model index out of range");
    std::vector<double> col(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index b = 0; b < scores.rows(); ++b)
        col[static_cast<std::size_t>(b)] = scores(b, static_cast<Eigen::Index>(model_index));
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    return n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
}

std::size_t ScoreTable::best_by_median() const {
    std::size_t best = 0;
    double best_v = median_of(0);
    for (std::size_t i = 1; i < models.size(); ++i) {
        const double v = median_of(i);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

std::size_t ScoreTable::worst_by_median() const {
    std::size_t worst = 0;
    double worst_v = median_of(0);
    for (std::size_t i = 1; i < models.size(); ++i) {
        const double v = median_of(i);
        if (v > worst_v) {
            worst_v = v;
            worst = i;
        }
    }
    return worst;
}

namespace {

std::uint64_t sub_seed(const Rng& parent, std::uint64_t tag) {
    Rng r = parent.derive(tag);
    return r.next();
}

void check_candidates(const std::vector<spec::Candidate>& candidates, int d,
                      const std::string& reserved) {
    std::set<std::string> seen{reserved};
    for (const auto& c : candidates) {
        if (c.label.find(',') != std::string::npos)
            throw DomainError("candidate labels must not contain commas: '" + c.label + "'");
        if (!seen.insert(c.label).second)
            throw DomainError("candidate labels must be unique: '" + c.label + "'");
        if (const auto* fixed = std::get_if<copula::CopulaSpec>(&c.model))
            if (copula::dim(*fixed) != d)
                throw DomainError("candidate '" + c.label + "' has dimension " +
                                  std::to_string(copula::dim(*fixed)) + ", data has " +
                                  std::to_string(d));
    }
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::vector<std::string> run_meta(std::uint64_t seed, Eigen::Index n_trn, int d, int d_out,
                                  const RunConfig& config, Eigen::Index actual_batch,
                                  TransformKind kind, int replications) {
    std::vector<std::string> meta;
    meta.push_back("seed=" + std::to_string(seed));
    meta.push_back("replications=" + std::to_string(replications));
    meta.push_back("n_trn=" + std::to_string(n_trn));
    meta.push_back("n_gen=" + std::to_string(config.n_gen));
    meta.push_back("d=" + std::to_string(d));
    meta.push_back("d_out=" + std::to_string(d_out));
    meta.push_back("transform=" + transform_kind_name(kind));
    if (kind == TransformKind::decouplenet) {
        meta.push_back("hidden=" + join_ints(config.hidden));
        meta.push_back("epochs=" + std::to_string(config.train.n_epochs));
        meta.push_back("batch=" + std::to_string(actual_batch));
        meta.push_back("bandwidths=" + join_doubles(config.train.bandwidths));
    }
    return meta;
}

} // namespace

AssessResult assess(const Eigen::MatrixXd& data, const std::vector<spec::Candidate>& candidates,
                    const RunConfig& config, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    const int d = static_cast<int>(data.cols());
    if (n < 50)
        throw DataError("assess: need at least 50 observations, got " + std::to_string(n));
    if (d < 2)
        throw DataError("assess: need at least 2 columns");
    check_candidates(candidates, d, "empirical");
    if (config.n_gen < 2)
        throw DomainError("assess: n_gen must be at least 2");

    const Sample pseudo = empirical::pseudo_observations(data);

    struct Entry {
        std::string label;
        copula::CopulaSpec spec;
    };
    std::vector<Entry> entries;
    std::vector<std::string> failures, fitted_meta;
    entries.push_back({"empirical", copula::EmpiricalCopula{pseudo}});
    for (const auto& c : candidates) {
        if (const auto* family = std::get_if<copula::FitFamily>(&c.model)) {
            try {
                copula::CopulaSpec spec = copula::fit_copula(*family, pseudo);
                fitted_meta.push_back("fitted." + c.label + "=" + copula::label(spec));
                entries.push_back({c.label, std::move(spec)});
            } catch (const FitError& e) {
                failures.push_back(c.label + ": " + e.what());
            }
        } else {
            entries.push_back({c.label, std::get<copula::CopulaSpec>(c.model)});
        }
    }

    net::NetConfig nc;
    nc.d = d;
    nc.d_out = config.d_out;
    nc.hidden = config.hidden;
    net::TrainConfig tc = config.train;
    tc.seed = 0; // set below; the run seed is the only source of randomness
    if (n % tc.n_batch != 0)
        tc.n_batch = n; // fall back to batch optimization

    Rng root(seed);
    tc.seed = sub_seed(root, 1);
    net::NetWeights weights = net::train(pseudo, nc, tc);

    const std::size_t m = entries.size();
    std::vector<double> score(m);
    std::vector<ModelSamples> samples(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rng gen = root.derive(1000 + static_cast<std::uint64_t>(i));
        Sample generated = copula::sample_copula(entries[i].spec, config.n_gen, gen);
        Sample transformed = net::transform(nc, weights, generated);
        score[i] = empirical::cvm_score(transformed);
        samples[i] = ModelSamples{entries[i].label, std::move(generated), std::move(transformed)};
    }

    // Benchmark first, remaining models by ascending score.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin() + 1, order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

    AssessResult out;
    out.table.models.reserve(m);
    out.table.scores.resize(1, static_cast<Eigen::Index>(m));
    out.samples.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        out.table.models.push_back(entries[order[k]].label);
        out.table.scores(0, static_cast<Eigen::Index>(k)) = score[order[k]];
        out.samples.push_back(std::move(samples[order[k]]));
    }
    out.table.meta =
        run_meta(seed, n, d, nc.d_out, config, tc.n_batch, TransformKind::decouplenet, 1);
    out.table.meta.insert(out.table.meta.end(), fitted_meta.begin(), fitted_meta.end());
    out.table.failures = std::move(failures);
    out.net_config = nc;
    out.net = std::move(weights);
    return out;
}

ScoreTable simulation_study(const copula::CopulaSpec& true_spec,
                            const std::vector<spec::Candidate>& candidates, int replications,
                            Eigen::Index n_trn, const RunConfig& config, std::uint64_t seed,
                            TransformKind kind) {
    copula::validate(true_spec);
    const int d = copula::dim(true_spec);
    const std::string true_label = copula::label(true_spec);
    check_candidates(candidates, d, true_label);
    if (replications < 1)
        throw DomainError("simulation_study: need at least one replication");
    if (n_trn < 50)
        throw DataError("simulation_study: need n_trn >= 50");
    if (config.n_gen < 2)
        throw DomainError("simulation_study: n_gen must be at least 2");
    if (kind == TransformKind::rosenblatt && !rosenblatt::supported(true_spec))
        throw DomainError("simulation_study: " + true_label +
                          " has no exact conditional transform; use kind=decouplenet");

    const int d_out = kind == TransformKind::decouplenet ? config.d_out : d;

    net::NetConfig nc;
    nc.d = d;
    nc.d_out = config.d_out;
    nc.hidden = config.hidden;
    net::TrainConfig tc = config.train;
    if (n_trn % tc.n_batch != 0)
        tc.n_batch = n_trn;

    const std::size_t m = candidates.size() + 1;
    Eigen::MatrixXd scores(replications, static_cast<Eigen::Index>(m));
    std::vector<bool> failed(m, false);
    std::vector<std::string> failures;

    Rng root(seed);
    for (int b = 1; b <= replications; ++b) {
        Rng rb = root.derive(static_cast<std::uint64_t>(b));
        Rng data_rng = rb.derive(1);
        const Sample raw = copula::sample_copula(true_spec, n_trn, data_rng);
        const Sample pseudo = empirical::pseudo_observations(raw.values);

        net::NetWeights weights;
        if (kind == TransformKind::decouplenet) {
            tc.seed = sub_seed(rb, 2);
            weights = net::train(pseudo, nc, tc);
        }

        for (std::size_t mi = 0; mi < m; ++mi) {
            if (failed[mi])
                continue;
            Rng gen = rb.derive(100 + static_cast<std::uint64_t>(mi));
            copula::CopulaSpec spec = true_spec;
            if (mi > 0) {
                const auto& cand = candidates[mi - 1];
                if (const auto* family = std::get_if<copula::FitFamily>(&cand.model)) {
                    try {
                        spec = copula::fit_copula(*family, pseudo);
                    } catch (const FitError& e) {
                        failed[mi] = true;
                        failures.push_back(cand.label + ": " + e.what() + " (replication " +
                                           std::to_string(b) + ")");
                        continue;
                    }
                } else {
                    spec = std::get<copula::CopulaSpec>(cand.model);
                }
            }
            const Sample generated = copula::sample_copula(spec, config.n_gen, gen);
            const Sample transformed = kind == TransformKind::decouplenet
                                           ? net::transform(nc, weights, generated)
                                           : rosenblatt::transform(true_spec, generated);
            scores(b - 1, static_cast<Eigen::Index>(mi)) = empirical::cvm_score(transformed);
        }
    }

    // Null calibration of the score at this (n_gen, d_out): flags replications
    // whose true-model score is an order of magnitude above uniform noise,
    // which indicates a failed training run rather than model misfit.
    Rng null_rng = root.derive(777);
    const std::vector<double> nulls =
        empirical::cvm_null_scores(config.n_gen, d_out, 200, null_rng);
    const double null_median = 0.5 * (nulls[99] + nulls[100]);
    std::string flagged;
    for (int b = 0; b < replications; ++b)
        if (scores(b, 0) >= 10.0 * null_median)
            flagged += (flagged.empty() ? "" : ",") + std::to_string(b + 1);

    ScoreTable table;
    table.models.push_back(true_label);
    std::vector<Eigen::Index> kept{0};
    for (std::size_t mi = 1; mi < m; ++mi)
        if (!failed[mi]) {
            table.models.push_back(candidates[mi - 1].label);
            kept.push_back(static_cast<Eigen::Index>(mi));
        }
    table.scores.resize(replications, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k)
        table.scores.col(static_cast<Eigen::Index>(k)) = scores.col(kept[k]);
    table.meta = run_meta(seed, n_trn, d, d_out, config, tc.n_batch, kind, replications);
    table.meta.push_back("true=" + true_label);
    table.meta.push_back("null_median=" + format_double(null_median));
    table.meta.push_back("flagged_replications=" + (flagged.empty() ? "none" : flagged));
    table.failures = std::move(failures);
    return table;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_net(const std::string& path, const net::NetConfig& config, const net::NetWeights& w) {
    net::validate(config);
    net::check_shapes(config, w);
    std::string s = "DECOUPLENET v1\n";
    s += std::to_string(config.d) + " " + std::to_string(config.d_out) + " " +
         join_ints(config.hidden) + " " + net::activation_name(config.hidden_activation) + " " +
         net::activation_name(config.output_activation) + "\n";
    for (std::size_t l = 0; l < w.layers(); ++l) {
        const Eigen::MatrixXd& weight = w.weights[l];
        for (Eigen::Index r = 0; r < weight.rows(); ++r)
            for (Eigen::Index c = 0; c < weight.cols(); ++c) {
                if (r != 0 || c != 0)
                    s += ' ';
                s += format_double(weight(r, c));
            }
        s += '\n';
        for (Eigen::Index r = 0; r < w.biases[l].size(); ++r) {
            if (r != 0)
                s += ' ';
            s += format_double(w.biases[l](r));
        }
        s += '\n';
    }
    io::atomic_write(path, s);
}

namespace {

std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos)
            nl = content.size();
        std::string line = content.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    return lines;
}

std::vector<double> parse_reals(const std::string& line, std::size_t expected,
                                const std::string& what) {
    std::vector<double> out;
    out.reserve(expected);
    const char* p = line.c_str();
    while (*p != '\0') {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p)
            throw FormatError("net file: cannot parse " + what);
        out.push_back(v);
        p = end;
        while (*p == ' ')
            ++p;
    }
    if (out.size() != expected)
        throw FormatError("net file: " + what + " has " + std::to_string(out.size()) +
                          " values, expected " + std::to_string(expected));
    return out;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ')
            ++pos;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ')
            ++end;
        if (end > pos)
            out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

} // namespace

LoadedNet load_net(const std::string& path) {
    const std::vector<std::string> lines = split_lines(io::read_file(path));
    if (lines.empty() || lines[0] != "DECOUPLENET v1")
        throw FormatError("net file: unsupported header (expected 'DECOUPLENET v1')");
    if (lines.size() < 2)
        throw FormatError("net file: missing architecture line");

    const std::vector<std::string> arch = split_ws(lines[1]);
    if (arch.size() != 5)
        throw FormatError("net file: architecture line needs 5 fields "
                          "(d d' hidden-sizes hidden-act output-act)");
    LoadedNet out;
    try {
        out.config.d = std::stoi(arch[0]);
        out.config.d_out = std::stoi(arch[1]);
        out.config.hidden.clear();
        std::size_t pos = 0;
        while (pos <= arch[2].size()) {
            std::size_t comma = arch[2].find(',', pos);
            if (comma == std::string::npos)
                comma = arch[2].size();
            out.config.hidden.push_back(std::stoi(arch[2].substr(pos, comma - pos)));
            pos = comma + 1;
        }
    } catch (const std::exception&) {
        throw FormatError("net file: malformed architecture line");
    }
    out.config.hidden_activation = net::activation_from_name(arch[3]);
    out.config.output_activation = net::activation_from_name(arch[4]);
    net::validate(out.config);

    const std::vector<int> sizes = out.config.layer_sizes();
    const std::size_t layers = sizes.size() - 1;
    if (lines.size() != 2 + 2 * layers)
        throw FormatError("net file: expected " + std::to_string(2 + 2 * layers) +
                          " lines, found " + std::to_string(lines.size()));
    for (std::size_t l = 0; l < layers; ++l) {
        const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
        const auto cols = static_cast<Eigen::Index>(sizes[l]);
        const std::vector<double> wv =
            parse_reals(lines[2 + 2 * l], static_cast<std::size_t>(rows * cols),
                        "layer " + std::to_string(l + 1) + " weights");
        Eigen::MatrixXd weight(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                weight(r, c) = wv[static_cast<std::size_t>(r * cols + c)];
        const std::vector<double> bv =
            parse_reals(lines[3 + 2 * l], static_cast<std::size_t>(rows),
                        "layer " + std::to_string(l + 1) + " biases");
        out.weights.weights.push_back(std::move(weight));
        out.weights.biases.push_back(
            Eigen::Map<const Eigen::VectorXd>(bv.data(), static_cast<Eigen::Index>(bv.size())));
    }
    try {
        net::check_shapes(out.config, out.weights);
    } catch (const std::exception& e) {
        throw FormatError(std::string("net file: ") + e.what());
    }
    return out;
}

void save_score_table(const std::string& csv_path, const ScoreTable& table) {
    if (table.models.empty() || table.scores.rows() < 1)
        throw DataError("score table: empty");
    if (static_cast<std::size_t>(table.scores.cols()) != table.models.size())
        throw DataError("score table: column/label mismatch");
    std::string csv = "replication,model,score\n";
    for (Eigen::Index b = 0; b < table.scores.rows(); ++b)
        for (std::size_t mi = 0; mi < table.models.size(); ++mi) {
            if (table.models[mi].find(',') != std::string::npos)
                throw DataError("score table: model labels must not contain commas");
            csv += std::to_string(b + 1) + "," + table.models[mi] + "," +
                   format_double(table.scores(b, static_cast<Eigen::Index>(mi))) + "\n";
        }
    io::atomic_write(csv_path, csv);

    std::string meta;
    for (const std::string& line : table.meta)
        meta += line + "\n";
    for (const std::string& f : table.failures)
        meta += "failure=" + f + "\n";
    io::atomic_write(csv_path + ".meta", meta);
}

ScoreTable load_score_table(const std::string& csv_path) {
    const std::vector<std::string> lines = split_lines(io::read_file(csv_path));
    if (lines.empty() || lines[0] != "replication,model,score")
        throw FormatError("score table: expected header 'replication,model,score'");

    ScoreTable table;
    std::vector<std::pair<int, double>> cells; // (replication, score) per row, model by order
    std::vector<std::string> row_models;
    int max_b = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const std::size_t c1 = lines[i].find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                       : lines[i].find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            lines[i].find(',', c2 + 1) != std::string::npos)
            throw FormatError("score table: row " + std::to_string(i + 1) +
                              " needs exactly 3 fields");
        char* end = nullptr;
        const long b = std::strtol(lines[i].c_str(), &end, 10);
        if (end != lines[i].c_str() + c1 || b < 1)
            throw FormatError("score table: bad replication index in row " +
                              std::to_string(i + 1));
        const std::string model = lines[i].substr(c1 + 1, c2 - c1 - 1);
        const std::string score_text = lines[i].substr(c2 + 1);
        const double score = std::strtod(score_text.c_str(), &end);
        if (end != score_text.c_str() + score_text.size() || !std::isfinite(score))
            throw FormatError("score table: bad score in row " + std::to_string(i + 1));
        if (b == 1 &&
            std::find(table.models.begin(), table.models.end(), model) == table.models.end())
            table.models.push_back(model);
        cells.emplace_back(static_cast<int>(b), score);
        row_models.push_back(model);
        max_b = std::max(max_b, static_cast<int>(b));
    }
    if (table.models.empty() || max_b < 1)
        throw FormatError("score table: no data rows");

    const auto m = static_cast<Eigen::Index>(table.models.size());
    table.scores.resize(max_b, m);
    Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(max_b, m);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto it = std::find(table.models.begin(), table.models.end(), row_models[i]);
        if (it == table.models.end())
            throw FormatError("score table: model '" + row_models[i] +
                              "' missing from replication 1");
        const auto col = static_cast<Eigen::Index>(it - table.models.begin());
        table.scores(cells[i].first - 1, col) = cells[i].second;
        seen(cells[i].first - 1, col) = 1;
    }
    if (seen.sum() != max_b * m)
        throw FormatError("score table: incomplete replication x model grid");

    std::ifstream meta_in(csv_path + ".meta");
    if (meta_in) {
        std::string line;
        while (std::getline(meta_in, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            if (line.rfind("failure=", 0) == 0)
                table.failures.push_back(line.substr(8));
            else
                table.meta.push_back(line);
        }
    }
    return table;
}

} // namespace dcn::pipeline
