#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rgame/errors.hpp"
#include "rgame/rng.hpp"

namespace rgame {

using Json = nlohmann::ordered_json;

// Token id 0 is reserved for the mask symbol, id 1 for unknown words.
constexpr std::size_t kMaskTokenId = 0;
constexpr std::size_t kUnkTokenId = 1;

struct Vocab {
    std::unordered_map<std::string, std::size_t> to_id;
    std::vector<std::string> to_word;

    Vocab() { reserve_specials(); }

    void reserve_specials() {
        if (!to_word.empty()) return;
        add("<mask>");
        add("<unk>");
    }

    std::size_t add(const std::string& word) {
        auto it = to_id.find(word);
        if (it != to_id.end()) return it->second;
        const std::size_t id = to_word.size();
        to_word.push_back(word);
        to_id.emplace(word, id);
        return id;
    }

    std::size_t id_or_unk(const std::string& word) const {
        auto it = to_id.find(word);
        return it == to_id.end() ? kUnkTokenId : it->second;
    }

    std::size_t size() const { return to_word.size(); }
};

struct TokenSequence {
    std::vector<std::size_t> tokens;
    std::size_t label = 0;
    std::optional<std::vector<int>> gold_mask;  // 0/1 per position when annotated
};

struct Dataset {
    std::vector<TokenSequence> examples;
    Vocab vocab;
    std::size_t num_classes = 0;

    void validate() const {
        for (std::size_t n = 0; n < examples.size(); ++n) {
            const TokenSequence& ex = examples[n];
            if (ex.tokens.empty()) throw EmptyInputError("example " + std::to_string(n) + " has no tokens");
            for (std::size_t t : ex.tokens) {
                if (t >= vocab.size()) {
                    throw VocabError("example " + std::to_string(n) + ": token id " + std::to_string(t) +
                                     " outside vocab of size " + std::to_string(vocab.size()));
                }
            }
            if (ex.label >= num_classes) {
                throw LabelError("example " + std::to_string(n) + ": label " + std::to_string(ex.label) +
                                 " outside [0, " + std::to_string(num_classes) + ")");
            }
            if (ex.gold_mask && ex.gold_mask->size() != ex.tokens.size()) {
                throw ShapeError("example " + std::to_string(n) + ": rationale length " +
                                 std::to_string(ex.gold_mask->size()) + " vs tokens " +
                                 std::to_string(ex.tokens.size()));
            }
        }
    }
};

// Tiny discrete distribution over labeled sequences, for exact computations.
// All sequences share one length; probabilities sum to 1.
struct FiniteTask {
    struct Entry {
        std::vector<std::size_t> tokens;
        std::size_t label = 0;
        double prob = 0.0;
    };
    std::string description;
    std::size_t num_classes = 0;
    std::vector<Entry> support;

    std::size_t seq_len() const { return support.empty() ? 0 : support[0].tokens.size(); }

    void validate() const {
        if (support.empty()) throw ConfigError("finite task has empty support");
        double total = 0.0;
        for (const auto& e : support) {
            if (e.tokens.size() != seq_len()) {
                throw ShapeError("finite task sequences must share one length");
            }
            if (e.label >= num_classes) throw LabelError("finite task label out of range");
            if (e.prob < 0.0) throw ConfigError("finite task probability is negative");
            total += e.prob;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ConfigError("finite task probabilities sum to " + std::to_string(total));
        }
    }
};

// ---- JSONL dataset records ----
//
// One JSON object per line: {"tokens": [...], "label": int, "rationale": [0/1...]?}
// where tokens are words (strings) or bare integer ids. Word files build or
// extend a vocabulary on load; integer files get placeholder words so every
// id stays inside the vocabulary.

inline Dataset load_jsonl(const std::string& path, const Vocab* fixed_vocab = nullptr) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open dataset: " + path);
    Dataset ds;
    if (fixed_vocab) ds.vocab = *fixed_vocab;
    std::string line;
    std::size_t lineno = 0;
    std::size_t max_label = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json rec;
        try {
            rec = Json::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        if (!rec.contains("tokens") || !rec.contains("label")) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": record needs tokens and label");
        }
        TokenSequence ex;
        for (const auto& tok : rec["tokens"]) {
            if (tok.is_string()) {
                const std::string w = tok.get<std::string>();
                ex.tokens.push_back(fixed_vocab ? ds.vocab.id_or_unk(w) : ds.vocab.add(w));
            } else if (tok.is_number_unsigned() || tok.is_number_integer()) {
                const long long id = tok.get<long long>();
                if (id < 0) throw ParseError(path + ":" + std::to_string(lineno) + ": negative token id");
                ex.tokens.push_back(static_cast<std::size_t>(id));
                while (ds.vocab.size() <= ex.tokens.back()) {
                    ds.vocab.add("#" + std::to_string(ds.vocab.size()));
                }
            } else {
                throw ParseError(path + ":" + std::to_string(lineno) + ": token must be word or id");
            }
        }
        if (ex.tokens.empty()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty token list");
        }
        if (!rec["label"].is_number_integer() && !rec["label"].is_number_unsigned()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": label must be an integer");
        }
        const long long lab = rec["label"].get<long long>();
        if (lab < 0) throw ParseError(path + ":" + std::to_string(lineno) + ": negative label");
        ex.label = static_cast<std::size_t>(lab);
        max_label = std::max(max_label, ex.label);
        if (rec.contains("rationale")) {
            std::vector<int> z;
            for (const auto& b : rec["rationale"]) {
                const int v = b.get<int>();
                if (v != 0 && v != 1) {
                    throw ParseError(path + ":" + std::to_string(lineno) + ": rationale entries must be 0/1");
                }
                z.push_back(v);
            }
            if (z.size() != ex.tokens.size()) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": rationale length mismatch");
            }
            ex.gold_mask = std::move(z);
        }
        ds.examples.push_back(std::move(ex));
    }
    ds.num_classes = max_label + 1;
    ds.validate();
    return ds;
}

inline void save_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& ex : ds.examples) {
        Json rec;
        Json toks = Json::array();
        for (std::size_t t : ex.tokens) toks.push_back(ds.vocab.to_word[t]);
        rec["tokens"] = std::move(toks);
        rec["label"] = ex.label;
        if (ex.gold_mask) rec["rationale"] = *ex.gold_mask;
        os << rec.dump() << "\n";
    }
    if (!os) throw std::runtime_error("write failure: " + path);
}

// Deterministic split into (train, held-out) by shuffling indices with `seed`.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double holdout_fraction,
                                                 std::uint64_t seed) {
    std::vector<std::size_t> idx(ds.examples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(mix_seed(seed, 0x5317));
    rng.shuffle(idx);
    const std::size_t n_hold = static_cast<std::size_t>(holdout_fraction * static_cast<double>(idx.size()));
    Dataset a, b;
    a.vocab = ds.vocab;
    b.vocab = ds.vocab;
    a.num_classes = ds.num_classes;
    b.num_classes = ds.num_classes;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        (k < n_hold ? b : a).examples.push_back(ds.examples[idx[k]]);
    }
    return {std::move(a), std::move(b)};
}

// ---- finite task JSON ----
//
// {"description": str, "num_classes": int,
//  "support": [{"tokens": [ids...], "label": int, "prob": float}, ...]}

inline FiniteTask load_finite_task(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open task: " + path);
    Json j;
    try {
        j = Json::parse(is);
    } catch (const std::exception& e) {
        throw ParseError(path + ": bad JSON: " + std::string(e.what()));
    }
    FiniteTask task;
    task.description = j.value("description", std::string());
    task.num_classes = j.at("num_classes").get<std::size_t>();
    for (const auto& e : j.at("support")) {
        FiniteTask::Entry entry;
        for (const auto& t : e.at("tokens")) entry.tokens.push_back(t.get<std::size_t>());
        entry.label = e.at("label").get<std::size_t>();
        entry.prob = e.at("prob").get<double>();
        task.support.push_back(std::move(entry));
    }
    task.validate();
    return task;
}

inline Json finite_task_to_json(const FiniteTask& task) {
    Json j;
    j["description"] = task.description;
    j["num_classes"] = task.num_classes;
    Json support = Json::array();
    for (const auto& e : task.support) {
        Json entry;
        entry["tokens"] = e.tokens;
        entry["label"] = e.label;
        entry["prob"] = e.prob;
        support.push_back(std::move(entry));
    }
    j["support"] = std::move(support);
    return j;
}

}  // namespace rgame
