#include "cli.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decouplenet/copula.hpp"
#include "decouplenet/csv.hpp"
#include "decouplenet/empirical.hpp"
#include "decouplenet/errors.hpp"
#include "decouplenet/format.hpp"
#include "decouplenet/net.hpp"
#include "decouplenet/pipeline.hpp"
#include "decouplenet/rng.hpp"
#include "decouplenet/sample.hpp"
#include "decouplenet/spec_strings.hpp"
#include "decouplenet/svg.hpp"

namespace {

using namespace dcn;

// ---------------------------------------------------------------------------
// Shared flag bundles
// ---------------------------------------------------------------------------

// A model is given either as one --spec string or through per-parameter
// flags; both funnel into the same spec-string parser.
struct SpecFlags {
    std::string spec_text;
    std::string family;
    int d = 2;
    std::optional<double> tau, theta, rho, nu, tau0;
    std::optional<long long> pseed;
    std::vector<std::string> groups;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
    cmd->add_option("--spec", f.spec_text,
                    "Full model spec, e.g. 'clayton(d=3,tau=0.4)' (overrides family flags)");
    cmd->add_option("--family", f.family,
                    "Model family: independence, clayton, frank, gumbel, normal, t, "
                    "nested-clayton");
    cmd->add_option("--d", f.d, "Dimension (default 2)");
    cmd->add_option("--tau", f.tau, "Kendall's tau parameterization");
    cmd->add_option("--theta", f.theta, "Direct Archimedean parameter");
    cmd->add_option("--rho", f.rho, "Exchangeable correlation (normal/t)");
    cmd->add_option("--nu", f.nu, "Degrees of freedom (t)");
    cmd->add_option("--pseed", f.pseed, "Random correlation matrix seed (normal/t)");
    cmd->add_option("--tau0", f.tau0, "Root tau (nested-clayton)");
    cmd->add_option("--group", f.groups,
                    "Nested-clayton group '1+2:0.4' (1-based members:tau); repeatable");
}

copula::CopulaSpec spec_from_flags(const SpecFlags& f) {
    if (!f.spec_text.empty()) {
        if (!f.family.empty())
            throw DomainError("give either --spec or --family flags, not both");
        return spec::parse_copula(f.spec_text);
    }
    if (f.family.empty())
        throw DomainError("a model is required: --spec '<family(...)>' or --family <name>");
    std::string s = f.family + "(d=" + std::to_string(f.d);
    if (f.tau)
        s += ",tau=" + format_double(*f.tau);
    if (f.theta)
        s += ",theta=" + format_double(*f.theta);
    if (f.rho)
        s += ",rho=" + format_double(*f.rho);
    if (f.nu)
        s += ",nu=" + format_double(*f.nu);
    if (f.pseed)
        s += ",pseed=" + std::to_string(*f.pseed);
    if (f.tau0)
        s += ",tau0=" + format_double(*f.tau0);
    for (const std::string& g : f.groups)
        s += ",g=" + g;
    s += ")";
    return spec::parse_copula(s);
}

struct TrainFlags {
    std::uint64_t seed = 0;
    int dprime = 2;
    long long epochs = 100;
    long long batch = 1000;
    std::string bandwidths; // comma-separated, empty keeps the default
    std::string hidden;     // comma-separated, empty keeps the default
    long long n_gen = 10000;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_n_gen) {
    cmd->add_option("--seed", f.seed, "Run seed (default 0)");
    cmd->add_option("--dprime", f.dprime, "Net output dimension (default 2)");
    cmd->add_option("--epochs", f.epochs, "Training epochs (default 100)");
    cmd->add_option("--batch", f.batch, "Batch size (default 1000)");
    cmd->add_option("--bandwidths", f.bandwidths,
                    "Kernel bandwidths, comma-separated (default 0.05,0.1,0.5,1,5)");
    cmd->add_option("--hidden", f.hidden, "Hidden layer sizes (default 300,300)");
    if (with_n_gen)
        cmd->add_option("--n-gen", f.n_gen, "Points generated per model (default 10000)");
}

std::vector<double> parse_doubles_csv(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos)
            comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            throw DomainError("cannot parse " + what + " entry '" + tok + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

std::vector<int> parse_ints_csv(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (double v : parse_doubles_csv(text, what)) {
        if (v != static_cast<int>(v))
            throw DomainError(what + " entries must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

pipeline::RunConfig make_run_config(const TrainFlags& f) {
    pipeline::RunConfig config;
    config.d_out = f.dprime;
    config.n_gen = f.n_gen;
    config.train.n_epochs = f.epochs;
    config.train.n_batch = f.batch;
    if (!f.bandwidths.empty())
        config.train.bandwidths = parse_doubles_csv(f.bandwidths, "--bandwidths");
    if (!f.hidden.empty())
        config.hidden = parse_ints_csv(f.hidden, "--hidden");
    return config;
}

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::vector<std::string> numbered_header(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> h;
    for (Eigen::Index j = 0; j < count; ++j)
        h.push_back(prefix + std::to_string(j + 1));
    return h;
}

void emit_csv(const std::string& out_path, const Eigen::MatrixXd& values,
              const std::vector<std::string>& header) {
    if (out_path.empty())
        std::fputs(io::format_csv(values, header).c_str(), stdout);
    else
        io::write_csv(out_path, values, header);
}

std::string sanitize_label(const std::string& label) {
    std::string s;
    for (char c : label) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (keep)
            s += c;
        else if (!s.empty() && s.back() != '-')
            s += '-';
    }
    while (!s.empty() && s.back() == '-')
        s.pop_back();
    return s.empty() ? "model" : s;
}

std::string strip_csv_suffix(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
        return path.substr(0, path.size() - 4);
    return path;
}

void print_score_summary(const pipeline::ScoreTable& table) {
    std::printf("%-4s %-38s %s\n", "rank", "model", "median score");
    std::vector<std::size_t> order(table.models.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.median_of(a) < table.median_of(b);
    });
    for (std::size_t r = 0; r < order.size(); ++r)
        std::printf("%-4zu %-38s %.6g\n", r + 1, table.models[order[r]].c_str(),
                    table.median_of(order[r]));
    for (const std::string& f : table.failures)
        std::printf("dropped: %s\n", f.c_str());
}

// key=value file for `study`
struct StudyConfig {
    std::string true_spec;
    std::vector<std::string> candidates;
    int replications = 5;
    long long n_trn = 20000;
    std::uint64_t seed = 0;
    std::string transform = "decouplenet";
    TrainFlags train;
};

StudyConfig read_study_config(const std::string& path) {
    StudyConfig cfg;
    const std::string content = io::read_file(path);
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos)
            nl = content.size();
        std::string line = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(first, eq - first);
        const std::string value = line.substr(eq + 1);
        if (key == "true")
            cfg.true_spec = value;
        else if (key == "candidate")
            cfg.candidates.push_back(value);
        else if (key == "replications")
            cfg.replications = std::stoi(value);
        else if (key == "n_trn")
            cfg.n_trn = std::stoll(value);
        else if (key == "n_gen")
            cfg.train.n_gen = std::stoll(value);
        else if (key == "seed")
            cfg.seed = std::stoull(value);
        else if (key == "transform")
            cfg.transform = value;
        else if (key == "dprime")
            cfg.train.dprime = std::stoi(value);
        else if (key == "epochs")
            cfg.train.epochs = std::stoll(value);
        else if (key == "batch")
            cfg.train.batch = std::stoll(value);
        else if (key == "bandwidths")
            cfg.train.bandwidths = value;
        else if (key == "hidden")
            cfg.train.hidden = value;
        else
            throw DataError(path + ":" + std::to_string(line_no) + ": unknown key '" + key +
                            "'");
    }
    if (cfg.true_spec.empty())
        throw DataError(path + ": missing required key 'true'");
    return cfg;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

void run_sample(const SpecFlags& sf, long long n, std::uint64_t seed,
                const std::string& out_path) {
    const copula::CopulaSpec spec = spec_from_flags(sf);
    Rng rng(seed);
    const Sample s = copula::sample_copula(spec, n, rng);
    emit_csv(out_path, s.values, numbered_header("u", s.d()));
}

void run_boxprob(const SpecFlags& sf, const std::string& box, const std::string& method,
                 long long n_mc, std::uint64_t seed) {
    const copula::CopulaSpec spec = spec_from_flags(sf);
    const std::size_t colon = box.find(':');
    if (colon == std::string::npos)
        throw DomainError("--box needs the form 'l1,l2,...:u1,u2,...'");
    const std::vector<double> lo = parse_doubles_csv(box.substr(0, colon), "--box lower");
    const std::vector<double> hi = parse_doubles_csv(box.substr(colon + 1), "--box upper");
    const Eigen::VectorXd lower = Eigen::Map<const Eigen::VectorXd>(
        lo.data(), static_cast<Eigen::Index>(lo.size()));
    const Eigen::VectorXd upper = Eigen::Map<const Eigen::VectorXd>(
        hi.data(), static_cast<Eigen::Index>(hi.size()));

    copula::BoxProbability p{};
    if (method == "closed") {
        p = copula::box_probability(spec, lower, upper, copula::BoxMethod::closed_form);
    } else if (method == "mc") {
        Rng rng(seed);
        p = copula::box_probability(spec, lower, upper, copula::BoxMethod::monte_carlo, n_mc,
                                    &rng);
    } else {
        throw DomainError("--method must be 'closed' or 'mc'");
    }
    std::printf("%.10g\n", p.value);
    if (method == "mc")
        std::printf("se %.4g\n", p.std_error);
}

void run_train(const std::string& in_path, const std::string& out_path, const TrainFlags& tf,
               bool pseudo) {
    const io::Csv csv = io::read_csv(in_path);
    Sample input{csv.values};
    if (pseudo)
        input = empirical::pseudo_observations(csv.values);
    else if (!(csv.values.minCoeff() > 0.0) || !(csv.values.maxCoeff() < 1.0))
        throw DataError("train: input must lie strictly inside (0,1); pass --pseudo to "
                        "rank-transform raw data first");

    const pipeline::RunConfig config = make_run_config(tf);
    net::NetConfig nc;
    nc.d = static_cast<int>(input.d());
    nc.d_out = config.d_out;
    nc.hidden = config.hidden;
    net::TrainConfig tc = config.train;
    tc.seed = tf.seed;
    const net::NetWeights w = net::train(input, nc, tc);
    pipeline::save_net(out_path, nc, w);
    std::printf("trained %d->%d net on %lld rows, saved to %s\n", nc.d, nc.d_out,
                static_cast<long long>(input.n()), out_path.c_str());
}

void run_transform(const std::string& net_path, const std::string& in_path,
                   const std::string& out_path) {
    const pipeline::LoadedNet loaded = pipeline::load_net(net_path);
    const io::Csv csv = io::read_csv(in_path);
    const Sample out = net::transform(loaded.config, loaded.weights, Sample{csv.values});
    emit_csv(out_path, out.values, numbered_header("v", out.d()));
}

void run_assess(const std::string& in_path, const std::vector<std::string>& candidate_texts,
                const std::string& out_path, const TrainFlags& tf, const std::string& color_rule,
                bool no_plots) {
    const io::Csv csv = io::read_csv(in_path);
    std::vector<spec::Candidate> candidates;
    for (const std::string& t : candidate_texts)
        candidates.push_back(spec::parse_candidate(t));
    const pipeline::RunConfig config = make_run_config(tf);
    const pipeline::AssessResult result = pipeline::assess(csv.values, candidates, config, tf.seed);
    pipeline::save_score_table(out_path, result.table);

    if (!no_plots && result.net_config.d_out == 2) {
        const svg::ColorRule rule = svg::parse_color_rule(color_rule);
        const std::string stem = strip_csv_suffix(out_path);
        for (const pipeline::ModelSamples& ms : result.samples) {
            const std::vector<std::string> colors = svg::colors_for_sample(rule, ms.generated);
            io::atomic_write(stem + "-" + sanitize_label(ms.model) + ".svg",
                             svg::scatter_svg(ms.transformed, colors, ms.model));
        }
    }
    print_score_summary(result.table);
}

void run_study(const std::string& config_path, const std::string& out_path,
               const std::optional<std::uint64_t>& seed_override) {
    StudyConfig cfg = read_study_config(config_path);
    if (seed_override)
        cfg.seed = *seed_override;
    const copula::CopulaSpec true_spec = spec::parse_copula(cfg.true_spec);
    std::vector<spec::Candidate> candidates;
    for (const std::string& t : cfg.candidates)
        candidates.push_back(spec::parse_candidate(t));
    const pipeline::RunConfig config = make_run_config(cfg.train);
    const pipeline::ScoreTable table = pipeline::simulation_study(
        true_spec, candidates, cfg.replications, cfg.n_trn, config, cfg.seed,
        pipeline::transform_kind_from_name(cfg.transform));
    pipeline::save_score_table(out_path, table);

    std::vector<std::vector<double>> scores(table.models.size());
    for (std::size_t mi = 0; mi < table.models.size(); ++mi)
        for (Eigen::Index b = 0; b < table.scores.rows(); ++b)
            scores[mi].push_back(table.scores(b, static_cast<Eigen::Index>(mi)));
    io::atomic_write(strip_csv_suffix(out_path) + ".svg",
                     svg::boxplot_svg(table.models, scores, "CvM scores by model"));
    print_score_summary(table);
}

void run_plot_scatter(const std::string& in_path, const std::string& color_by,
                      const std::string& color_rule, const std::string& title,
                      const std::string& out_path) {
    const io::Csv points = io::read_csv(in_path);
    if (points.values.cols() != 2)
        throw DomainError("plot-scatter: input must have exactly 2 columns");
    const svg::ColorRule rule = svg::parse_color_rule(color_rule);
    Eigen::MatrixXd color_rows = points.values;
    if (!color_by.empty()) {
        color_rows = io::read_csv(color_by).values;
        if (color_rows.rows() != points.values.rows())
            throw DataError("plot-scatter: --color-by row count does not match the input");
    }
    const std::vector<std::string> colors = svg::colors_for_sample(rule, Sample{color_rows});
    io::atomic_write(out_path, svg::scatter_svg(Sample{points.values}, colors, title));
}

void run_plot_box(const std::string& in_path, const std::string& title,
                  const std::string& out_path) {
    const pipeline::ScoreTable table = pipeline::load_score_table(in_path);
    std::vector<std::vector<double>> scores(table.models.size());
    for (std::size_t mi = 0; mi < table.models.size(); ++mi)
        for (Eigen::Index b = 0; b < table.scores.rows(); ++b)
            scores[mi].push_back(table.scores(b, static_cast<Eigen::Index>(mi)));
    io::atomic_write(out_path, svg::boxplot_svg(table.models, scores, title));
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"DecoupleNet: dependence-model assessment through learned uniformity maps"};
    app.require_subcommand(1);

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Draw a copula sample to CSV");
    SpecFlags sample_spec;
    long long sample_n = 1000;
    std::uint64_t sample_seed = 0;
    std::string sample_out;
    add_spec_flags(sample_cmd, sample_spec);
    sample_cmd->add_option("--n", sample_n, "Number of rows")->required();
    sample_cmd->add_option("--seed", sample_seed, "Seed (default 0)");
    sample_cmd->add_option("--out", sample_out, "Output CSV (default: stdout)");

    // boxprob
    auto* box_cmd = app.add_subcommand("boxprob", "Probability of a half-open box");
    SpecFlags box_spec;
    std::string box_text, box_method = "closed";
    long long box_n_mc = 1000000;
    std::uint64_t box_seed = 0;
    add_spec_flags(box_cmd, box_spec);
    box_cmd->add_option("--box", box_text, "Box as 'l1,l2,...:u1,u2,...'")->required();
    box_cmd->add_option("--method", box_method, "closed (default) or mc");
    box_cmd->add_option("--n-mc", box_n_mc, "Monte Carlo draws (default 1e6)");
    box_cmd->add_option("--seed", box_seed, "Seed for mc (default 0)");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a net on a CSV sample");
    std::string train_in, train_out;
    TrainFlags train_flags;
    bool train_pseudo = false;
    train_cmd->add_option("--in", train_in, "Input CSV")->required();
    train_cmd->add_option("--out", train_out, "Output net file")->required();
    train_cmd->add_flag("--pseudo", train_pseudo,
                        "Rank-transform the input to pseudo-observations first");
    add_train_flags(train_cmd, train_flags, false);

    // transform
    auto* tr_cmd = app.add_subcommand("transform", "Apply a trained net to a CSV sample");
    std::string tr_net, tr_in, tr_out;
    tr_cmd->add_option("--net", tr_net, "Net file from 'train'")->required();
    tr_cmd->add_option("--in", tr_in, "Input CSV")->required();
    tr_cmd->add_option("--out", tr_out, "Output CSV (default: stdout)");

    // assess
    auto* assess_cmd =
        app.add_subcommand("assess", "Score candidate models against a dataset");
    std::string assess_in, assess_out, assess_color = "mean";
    std::vector<std::string> assess_candidates;
    TrainFlags assess_flags;
    bool assess_no_plots = false;
    assess_cmd->add_option("--in", assess_in, "Data CSV")->required();
    assess_cmd->add_option("--candidate", assess_candidates,
                           "Candidate: 'fit:<family>' or a fixed spec; repeatable");
    assess_cmd->add_option("--out", assess_out, "Score CSV path")->required();
    assess_cmd->add_option("--color-rule", assess_color, "mean (default), corner, corner:<t>");
    assess_cmd->add_flag("--no-plots", assess_no_plots, "Skip the scatter SVGs");
    add_train_flags(assess_cmd, assess_flags, true);

    // study
    auto* study_cmd = app.add_subcommand("study", "Replicated simulation study from a config");
    std::string study_config, study_out;
    std::optional<std::uint64_t> study_seed;
    study_cmd->add_option("--config", study_config, "key=value config file")->required();
    study_cmd->add_option("--out", study_out, "Score CSV path")->required();
    study_cmd->add_option("--seed", study_seed, "Override the config seed");

    // plot-scatter
    auto* ps_cmd = app.add_subcommand("plot-scatter", "Scatter SVG of a 2-column CSV");
    std::string ps_in, ps_color_by, ps_rule = "mean", ps_title, ps_out;
    ps_cmd->add_option("--in", ps_in, "2-column CSV")->required();
    ps_cmd->add_option("--color-by", ps_color_by, "CSV of input-space rows driving the colors");
    ps_cmd->add_option("--color-rule", ps_rule, "mean (default), corner, corner:<t>");
    ps_cmd->add_option("--title", ps_title, "Plot title");
    ps_cmd->add_option("--out", ps_out, "Output SVG")->required();

    // plot-box
    auto* pb_cmd = app.add_subcommand("plot-box", "Box plot SVG of a score CSV");
    std::string pb_in, pb_title = "CvM scores by model", pb_out;
    pb_cmd->add_option("--in", pb_in, "Score CSV (replication,model,score)")->required();
    pb_cmd->add_option("--title", pb_title, "Plot title");
    pb_cmd->add_option("--out", pb_out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(sample_cmd))
            run_sample(sample_spec, sample_n, sample_seed, sample_out);
        else if (app.got_subcommand(box_cmd))
            run_boxprob(box_spec, box_text, box_method, box_n_mc, box_seed);
        else if (app.got_subcommand(train_cmd))
            run_train(train_in, train_out, train_flags, train_pseudo);
        else if (app.got_subcommand(tr_cmd))
            run_transform(tr_net, tr_in, tr_out);
        else if (app.got_subcommand(assess_cmd))
            run_assess(assess_in, assess_candidates, assess_out, assess_flags, assess_color,
                       assess_no_plots);
        else if (app.got_subcommand(study_cmd))
            run_study(study_config, study_out, study_seed);
        else if (app.got_subcommand(ps_cmd))
            run_plot_scatter(ps_in, ps_color_by, ps_rule, ps_title, ps_out);
        else if (app.got_subcommand(pb_cmd))
            run_plot_box(pb_in, pb_title, pb_out);
        return 0;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const FitError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const MatrixError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
