#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rgame/data.hpp"
#include "rgame/errors.hpp"
#include "rgame/rng.hpp"

namespace rgame {

// Synthetic corpora with known ground-truth rationales, plus the bundled
// finite tasks used by the exact checker. Generated datasets carry words
// "w<id>" so they survive a JSONL round trip with stable ids.

namespace detail {

inline Vocab numbered_vocab(std::size_t vocab_size) {
    Vocab v;
    for (std::size_t id = 2; id < vocab_size; ++id) v.add("w" + std::to_string(id));
    return v;
}

}  // namespace detail

struct PlantedConfig {
    std::size_t num_examples = 2000;
    std::size_t seq_len = 20;        // L
    std::size_t vocab_size = 120;    // includes the two reserved ids
    std::size_t signal_len = 3;      // k, contiguous span carrying the label
    double noise_rate = 0.0;         // fraction of labels flipped after planting
};

// Binary labels. A contiguous span of `signal_len` tokens is drawn mostly from
// the label's indicative pool (strict majority enforced); the rest of the
// sequence is neutral filler. gold_mask marks the span.
inline Dataset gen_planted_dataset(const PlantedConfig& cfg, std::uint64_t seed) {
    if (cfg.signal_len == 0 || cfg.signal_len > cfg.seq_len) {
        throw ConfigError("planted: signal_len must be in [1, seq_len]");
    }
    if (cfg.vocab_size < 2 + 8) throw ConfigError("planted: vocab_size too small");
    Rng rng(mix_seed(seed, 0x9147));

    // id layout: [2, 2+pool) indicative of label 0, [2+pool, 2+2*pool) of
    // label 1, the rest neutral filler
    const std::size_t pool = (cfg.vocab_size - 2) / 4;
    const std::size_t filler_base = 2 + 2 * pool;
    const std::size_t filler_count = cfg.vocab_size - filler_base;
    if (filler_count == 0) throw ConfigError("planted: no filler ids left");
    auto indicative = [&](std::size_t label) { return 2 + label * pool + rng.uniform_index(pool); };
    auto filler = [&]() { return filler_base + rng.uniform_index(filler_count); };
    auto pool_of = [&](std::size_t id) -> int {
        if (id < 2) return -1;
        if (id < 2 + pool) return 0;
        if (id < filler_base) return 1;
        return -1;
    };

    Dataset ds;
    ds.vocab = detail::numbered_vocab(cfg.vocab_size);
    ds.num_classes = 2;
    for (std::size_t n = 0; n < cfg.num_examples; ++n) {
        const std::size_t label = n % 2;
        TokenSequence ex;
        ex.tokens.resize(cfg.seq_len);
        for (auto& t : ex.tokens) t = filler();
        const std::size_t start = rng.uniform_index(cfg.seq_len - cfg.signal_len + 1);
        for (std::size_t i = 0; i < cfg.signal_len; ++i) {
            ex.tokens[start + i] = rng.bernoulli(0.75) ? indicative(label) : indicative(1 - label);
        }
        // enforce a strict majority of the label's own pool inside the span
        for (;;) {
            std::size_t own = 0;
            for (std::size_t i = 0; i < cfg.signal_len; ++i) {
                if (pool_of(ex.tokens[start + i]) == static_cast<int>(label)) ++own;
            }
            if (2 * own > cfg.signal_len) break;
            ex.tokens[start + rng.uniform_index(cfg.signal_len)] = indicative(label);
        }
        ex.label = rng.bernoulli(cfg.noise_rate) ? 1 - label : label;
        std::vector<int> gold(cfg.seq_len, 0);
        for (std::size_t i = 0; i < cfg.signal_len; ++i) gold[start + i] = 1;
        ex.gold_mask = std::move(gold);
        ds.examples.push_back(std::move(ex));
    }
    Rng shuffle_rng(mix_seed(seed, 0x9148));
    shuffle_rng.shuffle(ds.examples);
    ds.validate();
    return ds;
}

struct DegenConfig {
    std::size_t num_examples = 2000;
    std::size_t seq_len = 20;
    std::size_t vocab_size = 160;
};

// Binary labels decided by a single token planted away from both ends; the
// first and last positions are label-uncorrelated filler, so any model that
// leans on them has picked up an inter-player code rather than the content.
inline Dataset gen_degeneration_dataset(const DegenConfig& cfg, std::uint64_t seed) {
    if (cfg.seq_len < 3) throw ConfigError("degeneration: seq_len must be at least 3");
    if (cfg.vocab_size < 2 + 16) throw ConfigError("degeneration: vocab_size too small");
    Rng rng(mix_seed(seed, 0x3310));

    const std::size_t pool = (cfg.vocab_size - 2) / 8;
    const std::size_t filler_base = 2 + 2 * pool;
    const std::size_t filler_count = cfg.vocab_size - filler_base;
    auto signal = [&](std::size_t label) { return 2 + label * pool + rng.uniform_index(pool); };
    auto filler = [&]() { return filler_base + rng.uniform_index(filler_count); };

    Dataset ds;
    ds.vocab = detail::numbered_vocab(cfg.vocab_size);
    ds.num_classes = 2;
    for (std::size_t n = 0; n < cfg.num_examples; ++n) {
        const std::size_t label = n % 2;
        TokenSequence ex;
        ex.label = label;
        ex.tokens.resize(cfg.seq_len);
        for (auto& t : ex.tokens) t = filler();
        const std::size_t pos = 1 + rng.uniform_index(cfg.seq_len - 2);
        ex.tokens[pos] = signal(label);
        std::vector<int> gold(cfg.seq_len, 0);
        gold[pos] = 1;
        ex.gold_mask = std::move(gold);
        ds.examples.push_back(std::move(ex));
    }
    Rng shuffle_rng(mix_seed(seed, 0x3311));
    shuffle_rng.shuffle(ds.examples);
    ds.validate();
    return ds;
}

// ---- bundled finite tasks ----

// Three-class task whose unique optimal rationale (1 token, 1 piece) selects
// position 2 of every sequence. Positions 1 and 3 carry no extra information
// about Y beyond position 2, but their paired structure makes every deviation
// from the middle column strictly worse under the combined objective.
inline FiniteTask make_position2_task() {
    FiniteTask t;
    t.description = "middle column decides the label; edge columns echo a label-independent coin";
    t.num_classes = 3;
    t.support = {
        {{2, 4, 7}, 0, 0.25},
        {{3, 4, 8}, 0, 0.25},
        {{2, 5, 7}, 1, 0.25},
        {{3, 6, 8}, 2, 0.25},
    };
    t.validate();
    return t;
}

// Binary task where Y is fully determined by the middle token. Selecting the
// first token on one class and the last on the other is a position code:
// sufficient and compact, but its complement still reveals Y completely.
inline FiniteTask make_first_last_toy_task() {
    FiniteTask t;
    t.description = "middle token decides the label; ends are constant";
    t.num_classes = 2;
    t.support = {
        {{2, 4, 3}, 0, 0.5},
        {{2, 5, 3}, 1, 0.5},
    };
    t.validate();
    return t;
}

// X uniform over two binary digits, Y equals the first digit.
inline FiniteTask make_two_bit_task() {
    FiniteTask t;
    t.description = "two independent fair bits; the label copies the first";
    t.num_classes = 2;
    t.support = {
        {{2, 2}, 0, 0.25},
        {{2, 3}, 0, 0.25},
        {{3, 2}, 1, 0.25},
        {{3, 3}, 1, 0.25},
    };
    t.validate();
    return t;
}

inline FiniteTask builtin_task(const std::string& name) {
    if (name == "position2") return make_position2_task();
    if (name == "first-last-toy") return make_first_last_toy_task();
    if (name == "two-bit") return make_two_bit_task();
    throw ConfigError("unknown builtin task: " + name +
                      " (available: position2, first-last-toy, two-bit)");
}

}  // namespace rgame
