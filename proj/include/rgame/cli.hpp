#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "rgame/rgame.hpp"

namespace rgame::cli {

// Command-line front end. Every run resolves one configuration (JSON config
// file, then flag overrides), derives all randomness from a single --seed,
// and leaves a manifest next to its outputs with the resolved configuration
// and a hash of every artifact it wrote.

namespace detail {

inline std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot hash missing file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

inline Json game_to_json(const GameConfig& g) {
    Json j;
    j["lambda_g"] = g.lambda_g;
    j["lambda_s"] = g.lambda_s;
    j["lambda_cont"] = g.lambda_cont;
    j["h"] = g.h;
    j["h_r"] = g.h_r;
    j["s"] = g.s;
    j["c"] = g.c;
    j["c_pieces"] = g.c_pieces;
    j["explore"] = g.explore;
    j["threshold"] = g.threshold;
    return j;
}

inline void game_from_json(const Json& j, GameConfig& g) {
    g.lambda_g = j.value("lambda_g", g.lambda_g);
    g.lambda_s = j.value("lambda_s", g.lambda_s);
    g.lambda_cont = j.value("lambda_cont", g.lambda_cont);
    g.h = j.value("h", g.h);
    g.h_r = j.value("h_r", g.h_r);
    g.s = j.value("s", g.s);
    g.c = j.value("c", g.c);
    g.c_pieces = j.value("c_pieces", g.c_pieces);
    g.explore = j.value("explore", g.explore);
    g.threshold = j.value("threshold", g.threshold);
}

inline std::string schedule_name(TrainConfig::Schedule s) {
    return s == TrainConfig::Schedule::three_step ? "three_step" : "joint";
}

inline TrainConfig::Schedule schedule_from_name(const std::string& name) {
    if (name == "joint") return TrainConfig::Schedule::joint;
    if (name == "three_step") return TrainConfig::Schedule::three_step;
    throw ConfigError("unknown schedule: " + name + " (expected joint or three_step)");
}

inline Json train_to_json(const TrainConfig& t) {
    Json j;
    j["epochs"] = t.epochs;
    j["batch_size"] = t.batch_size;
    j["lr_predictors"] = t.lr_predictors;
    j["lr_generator"] = t.lr_generator;
    j["baseline_decay"] = t.baseline_decay;
    j["schedule"] = schedule_name(t.schedule);
    j["pretrain_classifier_epochs"] = t.pretrain_classifier_epochs;
    j["pretrain_generator_epochs"] = t.pretrain_generator_epochs;
    j["seed"] = t.seed;
    j["eval_every"] = t.eval_every;
    j["introspective"] = t.introspective;
    j["embed_dim"] = t.embed_dim;
    j["hidden_dim"] = t.hidden_dim;
    j["init_scale"] = t.init_scale;
    return j;
}

inline void train_from_json(const Json& j, TrainConfig& t) {
    t.epochs = j.value("epochs", t.epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.lr_predictors = j.value("lr_predictors", t.lr_predictors);
    t.lr_generator = j.value("lr_generator", t.lr_generator);
    t.baseline_decay = j.value("baseline_decay", t.baseline_decay);
    if (j.contains("schedule")) t.schedule = schedule_from_name(j["schedule"].get<std::string>());
    t.pretrain_classifier_epochs = j.value("pretrain_classifier_epochs", t.pretrain_classifier_epochs);
    t.pretrain_generator_epochs = j.value("pretrain_generator_epochs", t.pretrain_generator_epochs);
    t.seed = j.value("seed", t.seed);
    t.eval_every = j.value("eval_every", t.eval_every);
    t.introspective = j.value("introspective", t.introspective);
    t.embed_dim = j.value("embed_dim", t.embed_dim);
    t.hidden_dim = j.value("hidden_dim", t.hidden_dim);
    t.init_scale = j.value("init_scale", t.init_scale);
}

struct ManifestWriter {
    std::string command;
    std::vector<std::string> args;
    std::uint64_t seed = 0;
    Json config = Json::object();
    std::vector<std::string> outputs;

    void write(const std::string& path) const {
        Json j;
        j["command"] = command;
        j["args"] = args;
        j["seed"] = seed;
        j["config"] = config;
        Json arts = Json::object();
        for (const auto& p : outputs) {
            Json a;
            a["bytes"] = std::filesystem::file_size(p);
            a["fnv1a64"] = hex64(fnv1a64_file(p));
            arts[p] = std::move(a);
        }
        j["artifacts"] = std::move(arts);
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write manifest: " + path);
        os << j.dump(2) << "\n";
    }
};

// Loads --config JSON (if present among args) into the two config structs, so
// the CLI11 options defined afterwards see file values as their defaults and
// explicit flags override them.
inline void preload_config(const std::vector<std::string>& args, GameConfig& game, TrainConfig& train) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            std::ifstream is(args[i + 1]);
            if (!is) throw std::runtime_error("cannot open config: " + args[i + 1]);
            Json j;
            try {
                j = Json::parse(is);
            } catch (const std::exception& e) {
                throw ParseError(args[i + 1] + ": bad JSON: " + std::string(e.what()));
            }
            if (j.contains("game")) game_from_json(j["game"], game);
            if (j.contains("train")) train_from_json(j["train"], train);
        }
    }
}

inline void add_game_options(CLI::App* cmd, GameConfig& g) {
    cmd->add_option("--lambda-g", g.lambda_g, "weight of the predictor-gap hinge");
    cmd->add_option("--lambda-s", g.lambda_s, "weight of the sparsity hinge");
    cmd->add_option("--lambda-cont", g.lambda_cont, "weight of the continuity hinge");
    cmd->add_option("--gap-margin", g.h, "margin inside the loss-scale gap hinge");
    cmd->add_option("--gap-margin-reward", g.h_r, "margin inside the reward-scale gap hinge");
    cmd->add_option("--s", g.s, "token budget; below 1.0 it is a fraction of the length");
    cmd->add_option("--c", g.c, "per-transition allowance of the continuity penalty");
    cmd->add_option("--c-pieces", g.c_pieces, "piece budget used by checks and evaluation");
    cmd->add_option("--explore", g.explore, "exploration rate mixed into sampling");
    cmd->add_option("--threshold", g.threshold, "selection threshold at inference");
}

inline void add_train_options(CLI::App* cmd, TrainConfig& t) {
    cmd->add_option("--epochs", t.epochs, "joint training epochs");
    cmd->add_option("--batch-size", t.batch_size, "examples per update");
    cmd->add_option("--lr-predictors", t.lr_predictors, "learning rate of both predictors");
    cmd->add_option("--lr-generator", t.lr_generator, "learning rate of the generator side");
    cmd->add_option("--baseline-decay", t.baseline_decay, "decay of the reward baseline");
    cmd->add_option_function<std::string>(
           "--schedule", [&t](const std::string& v) { t.schedule = schedule_from_name(v); },
           "joint or three_step")
        ->default_str(schedule_name(t.schedule));
    cmd->add_option("--pretrain-classifier", t.pretrain_classifier_epochs,
                    "classifier-only epochs before the main loop");
    cmd->add_option("--pretrain-generator", t.pretrain_generator_epochs,
                    "generator-only epochs (three_step)");
    cmd->add_option("--eval-every", t.eval_every, "held-out evaluation cadence in epochs");
    cmd->add_flag("--introspective,!--plain", t.introspective,
                  "condition the generator on its own label guess");
    cmd->add_option("--embed-dim", t.embed_dim, "embedding width");
    cmd->add_option("--hidden-dim", t.hidden_dim, "recurrent state width");
    cmd->add_option("--init-scale", t.init_scale, "uniform init half-width");
}

inline CheckpointData checkpoint_from_state(const TrainState& st, const Dataset& train,
                                            const GameConfig& game, const TrainConfig& tc) {
    CheckpointData ck;
    ck.seed = tc.seed;
    Json echo;
    echo["game"] = game_to_json(game);
    echo["train"] = train_to_json(tc);
    ck.config_json = echo.dump();
    ck.num_classes = train.num_classes;
    ck.vocab_words = train.vocab.to_word;
    ck.players["generator"] = st.best_params.generator;
    ck.players["predictor"] = st.best_params.predictor;
    ck.players["complement_predictor"] = st.best_params.complement_predictor;
    if (st.best_params.introspective) ck.players["introspection"] = st.best_params.introspection;
    return ck;
}

struct LoadedModel {
    PlayerParams params;
    Vocab vocab;
    std::size_t num_classes = 0;
    GameConfig game;
    TrainConfig train;
    std::uint64_t seed = 0;
};

inline LoadedModel model_from_checkpoint(const std::string& path) {
    CheckpointData ck = load_checkpoint(path);
    LoadedModel m;
    m.seed = ck.seed;
    if (!ck.config_json.empty()) {
        const Json echo = Json::parse(ck.config_json);
        if (echo.contains("game")) game_from_json(echo["game"], m.game);
        if (echo.contains("train")) train_from_json(echo["train"], m.train);
    }
    m.num_classes = ck.num_classes;
    m.vocab.to_word.clear();
    m.vocab.to_id.clear();
    for (const auto& w : ck.vocab_words) m.vocab.add(w);
    auto take = [&](const char* name, ParamSet& dst) {
        auto it = ck.players.find(name);
        if (it == ck.players.end()) throw ParseError(std::string("checkpoint lacks player: ") + name);
        dst = std::move(it->second);
    };
    take("generator", m.params.generator);
    take("predictor", m.params.predictor);
    take("complement_predictor", m.params.complement_predictor);
    if (ck.players.count("introspection")) {
        m.params.introspective = true;
        m.params.introspection = std::move(ck.players["introspection"]);
    }
    return m;
}

inline Json eval_report_to_json(const EvalReport& ev) {
    Json j;
    j["examples"] = ev.examples;
    j["accuracy"] = ev.accuracy;
    j["accuracy_c"] = ev.accuracy_c;
    j["mean_selected_fraction"] = ev.mean_selected_fraction;
    j["mean_pieces"] = ev.mean_pieces;
    if (ev.has_rationale_metrics) {
        j["precision"] = ev.precision;
        j["recall"] = ev.recall;
    }
    return j;
}

inline MaskScheme load_mask_scheme(const std::string& path, const FiniteTask& task) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open mask file: " + path);
    Json j;
    try {
        j = Json::parse(is);
    } catch (const std::exception& e) {
        throw ParseError(path + ": bad JSON: " + std::string(e.what()));
    }
    MaskScheme scheme;
    for (const auto& row : j.at("masks")) {
        std::vector<int> z;
        for (const auto& b : row) z.push_back(b.get<int>());
        scheme.masks.push_back(std::move(z));
    }
    if (scheme.masks.size() != task.support.size()) {
        throw ShapeError("mask file covers " + std::to_string(scheme.masks.size()) +
                         " sequences, task has " + std::to_string(task.support.size()));
    }
    return scheme;
}

}  // namespace detail

inline int dispatch(std::vector<std::string> args) {
    GameConfig game;
    TrainConfig tc;
    try {
        detail::preload_config(args, game, tc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"three-player rationale selection game"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values")
        ->expected(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_kind = "planted";
    std::string synth_out;
    PlantedConfig planted;
    DegenConfig degen;
    std::uint64_t synth_seed = 1;
    std::size_t synth_n = 2000, synth_len = 20, synth_vocab = 120, synth_signal = 3;
    double synth_noise = 0.0;
    synth->add_option("--kind", synth_kind, "planted or degeneration")->required();
    synth->add_option("--out", synth_out, "output JSONL path")->required();
    synth->add_option("--n", synth_n, "number of examples");
    synth->add_option("--len", synth_len, "sequence length");
    synth->add_option("--vocab", synth_vocab, "vocabulary size including specials");
    synth->add_option("--signal-len", synth_signal, "planted span length (planted kind)");
    synth->add_option("--noise-rate", synth_noise, "label flip rate (planted kind)");
    synth->add_option("--seed", synth_seed, "random seed");

    // ---- train ----
    auto* train = app.add_subcommand("train", "train the three players");
    std::string train_data, train_dev, train_out_dir = ".";
    double dev_fraction = 0.1;
    train->add_option("--data", train_data, "training JSONL")->required();
    train->add_option("--dev", train_dev, "held-out JSONL; default splits --data");
    train->add_option("--dev-fraction", dev_fraction, "held-out share when splitting");
    train->add_option("--out-dir", train_out_dir, "directory for checkpoint, log, manifest");
    train->add_option("--seed", tc.seed, "random seed");
    detail::add_game_options(train, game);
    detail::add_train_options(train, tc);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string eval_data, eval_ckpt, eval_out;
    double eval_ratio = 0.0;
    eval_cmd->add_option("--data", eval_data, "evaluation JSONL")->required();
    eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
    eval_cmd->add_option("--ratio", eval_ratio, "fixed selection ratio; 0 uses the threshold");
    eval_cmd->add_option("--out", eval_out, "write the report JSON here");

    // ---- rationalize ----
    auto* rat = app.add_subcommand("rationalize", "emit rationales for a dataset");
    std::string rat_data, rat_ckpt, rat_out, rat_masked;
    rat->add_option("--data", rat_data, "input JSONL")->required();
    rat->add_option("--checkpoint", rat_ckpt, "model checkpoint")->required();
    rat->add_option("--out", rat_out, "output JSONL with masks and probabilities")->required();
    rat->add_option("--masked-out", rat_masked, "also write text with selected tokens starred out");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "exact condition checks on a finite task");
    std::string verify_task, verify_mask, verify_objective = "entropy", verify_out;
    double verify_margin = -1.0;
    verify->add_option("--task", verify_task, "builtin name or task JSON path")->required();
    verify->add_option("--mask", verify_mask, "mask scheme JSON; omitted means enumerate");
    verify->add_option("--objective", verify_objective, "entropy or xent");
    verify->add_option("--margin", verify_margin, "margin in bits; default is half the label entropy");
    verify->add_option("--out", verify_out, "write the report JSON here");
    detail::add_game_options(verify, game);

    // ---- extract-aspect ----
    auto* aspect = app.add_subcommand("extract-aspect", "cut aspect spans out of review text");
    std::string aspect_in, aspect_out, aspect_targets;
    std::size_t aspect_threshold = 400;
    aspect->add_option("--in", aspect_in, "text file, one tokenized review per line")->required();
    aspect->add_option("--targets", aspect_targets, "comma-separated anchor words of the aspect")
        ->required();
    aspect->add_option("--freq-threshold", aspect_threshold, "minimum anchor frequency");
    aspect->add_option("--out", aspect_out, "output file, one span per line")->required();

    // ---- report ----
    auto* report = app.add_subcommand("report", "render logs and reports as tables");
    std::string report_log;
    std::vector<std::string> report_evals;
    report->add_option("--log", report_log, "training log JSONL");
    report->add_option("--eval", report_evals, "evaluation report JSON files");

    // lets --config appear after the subcommand name as well as before it
    for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; })) {
        sc->fallthrough();
    }

    std::vector<std::string> cli_args(args.begin() + 1, args.end());
    std::reverse(cli_args.begin(), cli_args.end());
    try {
        app.parse(cli_args);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (synth->parsed()) {
            Dataset ds;
            if (synth_kind == "planted") {
                planted.num_examples = synth_n;
                planted.seq_len = synth_len;
                planted.vocab_size = synth_vocab;
                planted.signal_len = synth_signal;
                planted.noise_rate = synth_noise;
                ds = gen_planted_dataset(planted, synth_seed);
            } else if (synth_kind == "degeneration") {
                degen.num_examples = synth_n;
                degen.seq_len = synth_len;
                degen.vocab_size = synth_vocab;
                ds = gen_degeneration_dataset(degen, synth_seed);
            } else {
                throw ConfigError("unknown synth kind: " + synth_kind);
            }
            save_jsonl(ds, synth_out);
            detail::ManifestWriter mw;
            mw.command = "synth";
            mw.args = args;
            mw.seed = synth_seed;
            mw.config["kind"] = synth_kind;
            mw.config["n"] = synth_n;
            mw.config["len"] = synth_len;
            mw.config["vocab"] = synth_vocab;
            if (synth_kind == "planted") {
                mw.config["signal_len"] = synth_signal;
                mw.config["noise_rate"] = synth_noise;
            }
            mw.outputs = {synth_out};
            mw.write(synth_out + ".manifest.json");
            std::cout << "wrote " << ds.examples.size() << " examples to " << synth_out << "\n";
            return 0;
        }

        if (train->parsed()) {
            Dataset full = load_jsonl(train_data);
            Dataset train_ds, dev_ds;
            if (!train_dev.empty()) {
                train_ds = std::move(full);
                dev_ds = load_jsonl(train_dev, &train_ds.vocab);
                dev_ds.num_classes = train_ds.num_classes = std::max(train_ds.num_classes, dev_ds.num_classes);
            } else {
                std::tie(train_ds, dev_ds) = split_dataset(full, dev_fraction, tc.seed);
            }
            const TrainState st = run_training(train_ds, dev_ds, game, tc);

            std::filesystem::create_directories(train_out_dir);
            const std::string ckpt_path = train_out_dir + "/checkpoint.bin";
            const std::string log_path = train_out_dir + "/train_log.jsonl";
            save_checkpoint(ckpt_path, detail::checkpoint_from_state(st, train_ds, game, tc));
            {
                std::ofstream os(log_path);
                if (!os) throw std::runtime_error("cannot write log: " + log_path);
                for (const EpochRecord& r : st.history) {
                    Json j;
                    j["epoch"] = r.epoch;
                    j["phase"] = r.phase;
                    j["loss_p"] = r.mean_loss.loss_p;
                    j["loss_c"] = r.mean_loss.loss_c;
                    j["loss_gap"] = r.mean_loss.loss_gap;
                    j["loss_sparsity"] = r.mean_loss.loss_sparsity;
                    j["loss_continuity"] = r.mean_loss.loss_continuity;
                    j["loss_total"] = r.mean_loss.total;
                    j["reward"] = r.mean_reward;
                    j["baseline"] = r.baseline;
                    j["dev_acc"] = r.has_dev ? Json(r.dev_acc) : Json(nullptr);
                    j["dev_acc_c"] = r.has_dev ? Json(r.dev_acc_c) : Json(nullptr);
                    j["selected_fraction"] = r.has_dev ? Json(r.dev_selected_fraction) : Json(nullptr);
                    j["pieces"] = r.has_dev ? Json(r.dev_pieces) : Json(nullptr);
                    os << j.dump() << "\n";
                }
            }
            detail::ManifestWriter mw;
            mw.command = "train";
            mw.args = args;
            mw.seed = tc.seed;
            mw.config["game"] = detail::game_to_json(game);
            mw.config["train"] = detail::train_to_json(tc);
            mw.outputs = {ckpt_path, log_path};
            mw.write(train_out_dir + "/manifest.json");
            std::cout << "best dev accuracy " << st.best_dev_acc << " at epoch " << st.best_epoch
                      << "; checkpoint " << ckpt_path << "\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            detail::LoadedModel m = detail::model_from_checkpoint(eval_ckpt);
            Dataset ds = load_jsonl(eval_data, &m.vocab);
            if (ds.num_classes > m.num_classes) {
                throw LabelError("data has labels outside the checkpoint's classes");
            }
            ds.num_classes = m.num_classes;
            const EvalReport ev = eval_ratio > 0.0 ? evaluate_at_ratio(ds, m.params, m.game, eval_ratio)
                                                   : evaluate(ds, m.params, m.game);
            const DegenerationReport dg = degeneration_report(ds, m.params, m.game);
            Json j = detail::eval_report_to_json(ev);
            j["majority"] = dg.majority;
            j["verdict"] = dg.verdict;
            std::cout << "examples              " << ev.examples << "\n";
            std::cout << "accuracy              " << ev.accuracy << "\n";
            std::cout << "complement accuracy   " << ev.accuracy_c << "\n";
            std::cout << "selected fraction     " << ev.mean_selected_fraction << "\n";
            std::cout << "pieces                " << ev.mean_pieces << "\n";
            if (ev.has_rationale_metrics) {
                std::cout << "rationale precision   " << ev.precision << "\n";
                std::cout << "rationale recall      " << ev.recall << "\n";
            }
            std::cout << "verdict               " << dg.verdict << "\n";
            if (!eval_out.empty()) {
                std::ofstream os(eval_out);
                if (!os) throw std::runtime_error("cannot write report: " + eval_out);
                os << j.dump(2) << "\n";
                detail::ManifestWriter mw;
                mw.command = "eval";
                mw.args = args;
                mw.seed = m.seed;
                mw.config["game"] = detail::game_to_json(m.game);
                mw.config["ratio"] = eval_ratio;
                mw.outputs = {eval_out};
                mw.write(eval_out + ".manifest.json");
            }
            return 0;
        }

        if (rat->parsed()) {
            detail::LoadedModel m = detail::model_from_checkpoint(rat_ckpt);
            Dataset ds = load_jsonl(rat_data, &m.vocab);
            if (ds.num_classes > m.num_classes) {
                throw LabelError("data has labels outside the checkpoint's classes");
            }
            ds.num_classes = m.num_classes;
            std::ofstream os(rat_out);
            if (!os) throw std::runtime_error("cannot write: " + rat_out);
            std::ofstream masked;
            if (!rat_masked.empty()) {
                masked.open(rat_masked);
                if (!masked) throw std::runtime_error("cannot write: " + rat_masked);
            }
            for (const TokenSequence& ex : ds.examples) {
                const GeneratorTrace t = rationale_probs(ex.tokens, m.params);
                const std::vector<int> z = infer_mask(t.probs, m.game);
                const MaskedViews views = apply_mask(ex.tokens, z);
                const std::size_t predicted =
                    argmax_lowest_tie(classifier_forward(views.rationale, m.params.predictor).probs);
                Json rec;
                Json toks = Json::array();
                for (std::size_t tok : ex.tokens) toks.push_back(m.vocab.to_word[tok]);
                rec["tokens"] = std::move(toks);
                rec["label"] = ex.label;
                rec["predicted"] = predicted;
                rec["mask"] = z;
                rec["probs"] = t.probs;
                os << rec.dump() << "\n";
                if (masked.is_open()) {
                    for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
                        if (i) masked << ' ';
                        masked << (z[i] ? "*" : m.vocab.to_word[ex.tokens[i]]);
                    }
                    masked << "\n";
                }
            }
            os.flush();
            if (masked.is_open()) masked.flush();
            detail::ManifestWriter mw;
            mw.command = "rationalize";
            mw.args = args;
            mw.seed = m.seed;
            mw.config["game"] = detail::game_to_json(m.game);
            mw.outputs = {rat_out};
            if (!rat_masked.empty()) mw.outputs.push_back(rat_masked);
            mw.write(rat_out + ".manifest.json");
            std::cout << "wrote rationales for " << ds.examples.size() << " examples\n";
            return 0;
        }

        if (verify->parsed()) {
            FiniteTask task;
            if (std::filesystem::exists(verify_task)) {
                task = load_finite_task(verify_task);
            } else {
                task = builtin_task(verify_task);
            }
            OracleObjective form;
            if (verify_objective == "entropy") {
                form = OracleObjective::entropy_form;
            } else if (verify_objective == "xent") {
                form = OracleObjective::xent_form;
            } else {
                throw ConfigError("unknown objective: " + verify_objective + " (entropy or xent)");
            }
            Json j;
            j["task"] = task.description.empty() ? verify_task : task.description;
            j["h_y"] = label_entropy(task);
            if (!verify_mask.empty()) {
                const MaskScheme scheme = detail::load_mask_scheme(verify_mask, task);
                const ConditionReport rep = check_conditions(task, scheme, game, verify_margin);
                const SchemeScore score = score_scheme(task, scheme, game, form, verify_margin);
                j["margin"] = rep.margin;
                j["h_y_given_x"] = rep.h_y_given_x;
                j["h_y_given_r"] = rep.h_y_given_r;
                j["h_y_given_rc"] = rep.h_y_given_rc;
                j["sufficient"] = rep.sufficient;
                j["comprehensive"] = rep.comprehensive;
                j["compact"] = rep.compact;
                j["objective"] = score.objective;
                std::cout << "H(Y) = " << label_entropy(task) << " bits, margin " << rep.margin << "\n";
                std::cout << "H(Y|R) = " << rep.h_y_given_r << ", H(Y|Rc) = " << rep.h_y_given_rc
                          << ", H(Y|X) = " << rep.h_y_given_x << "\n";
                std::cout << "sufficient " << (rep.sufficient ? "yes" : "no") << ", comprehensive "
                          << (rep.comprehensive ? "yes" : "no") << ", compact "
                          << (rep.compact ? "yes" : "no") << "\n";
                std::cout << "objective " << score.objective << "\n";
            } else {
                const EnumerationResult res = enumerate_best_masks(task, game, form, verify_margin);
                j["margin"] = res.margin;
                j["candidates"] = res.candidates;
                j["best_objective"] = res.best_objective;
                Json mins = Json::array();
                for (std::size_t k = 0; k < res.minimizers.size(); ++k) {
                    Json entry;
                    entry["masks"] = res.minimizers[k].masks;
                    entry["h_y_given_r"] = res.minimizer_scores[k].h_y_given_r;
                    entry["h_y_given_rc"] = res.minimizer_scores[k].h_y_given_rc;
                    mins.push_back(std::move(entry));
                }
                j["minimizers"] = std::move(mins);
                std::cout << "searched " << res.candidates << " masking schemes, best objective "
                          << res.best_objective << ", " << res.minimizers.size() << " minimizer(s)\n";
                for (const MaskScheme& s : res.minimizers) {
                    for (std::size_t i = 0; i < s.masks.size(); ++i) {
                        std::cout << "  seq " << i << " [";
                        for (std::size_t t = 0; t < s.masks[i].size(); ++t) {
                            std::cout << (t ? "," : "") << s.masks[i][t];
                        }
                        std::cout << "]";
                    }
                    std::cout << "\n";
                }
            }
            if (!verify_out.empty()) {
                std::ofstream os(verify_out);
                if (!os) throw std::runtime_error("cannot write report: " + verify_out);
                os << j.dump(2) << "\n";
            }
            return 0;
        }

        if (aspect->parsed()) {
            std::ifstream is(aspect_in);
            if (!is) throw std::runtime_error("cannot open: " + aspect_in);
            std::vector<std::vector<std::string>> reviews;
            std::string line;
            while (std::getline(is, line)) {
                std::istringstream ls(line);
                std::vector<std::string> toks;
                std::string tok;
                while (ls >> tok) toks.push_back(tok);
                reviews.push_back(std::move(toks));
            }
            std::set<std::string> targets;
            std::istringstream ts(aspect_targets);
            std::string t;
            while (std::getline(ts, t, ',')) {
                if (!t.empty()) targets.insert(t);
            }
            const AspectExtraction ex = extract_aspect(reviews, targets, aspect_threshold);
            std::ofstream os(aspect_out);
            if (!os) throw std::runtime_error("cannot write: " + aspect_out);
            for (const auto& span : ex.spans) {
                for (std::size_t i = 0; i < span.size(); ++i) {
                    if (i) os << ' ';
                    os << span[i];
                }
                os << "\n";
            }
            os.flush();
            std::cout << "anchors:";
            for (const auto& a : ex.anchors) std::cout << ' ' << a;
            std::cout << "\nwrote " << ex.spans.size() << " spans to " << aspect_out << "\n";
            return 0;
        }

        if (report->parsed()) {
            if (!report_log.empty()) {
                std::ifstream is(report_log);
                if (!is) throw std::runtime_error("cannot open log: " + report_log);
                std::printf("%6s %-10s %8s %8s %8s %9s %8s %8s %6s\n", "epoch", "phase", "loss_p",
                            "loss_c", "reward", "baseline", "dev_acc", "dev_accC", "sel%");
                std::string line;
                while (std::getline(is, line)) {
                    if (line.empty()) continue;
                    const Json j = Json::parse(line);
                    auto num = [&](const char* k) {
                        return j.contains(k) && !j[k].is_null() ? j[k].get<double>() : std::nan("");
                    };
                    std::printf("%6zu %-10s %8.4f %8.4f %8.4f %9.4f %8.4f %8.4f %6.3f\n",
                                j["epoch"].get<std::size_t>(), j["phase"].get<std::string>().c_str(),
                                num("loss_p"), num("loss_c"), num("reward"), num("baseline"),
                                num("dev_acc"), num("dev_acc_c"), num("selected_fraction"));
                }
            }
            if (!report_evals.empty()) {
                std::printf("%-32s %8s %8s %8s %8s %8s  %s\n", "report", "acc", "accC", "prec",
                            "rec", "sel%", "verdict");
                for (const auto& path : report_evals) {
                    std::ifstream is(path);
                    if (!is) throw std::runtime_error("cannot open report: " + path);
                    const Json j = Json::parse(is);
                    auto num = [&](const char* k) {
                        return j.contains(k) && !j[k].is_null() ? j[k].get<double>() : std::nan("");
                    };
                    std::printf("%-32s %8.4f %8.4f %8.4f %8.4f %8.4f  %s\n", path.c_str(),
                                num("accuracy"), num("accuracy_c"), num("precision"), num("recall"),
                                num("mean_selected_fraction"),
                                j.value("verdict", std::string("-")).c_str());
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int dispatch(int argc, const char* const* argv) {
    return dispatch(std::vector<std::string>(argv, argv + argc));
}

}  // namespace rgame::cli
