#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rgame/errors.hpp"
#include "rgame/params.hpp"

namespace rgame {

// Single binary container: run seed, config echo (JSON text), the vocabulary
// and class count needed to apply the model to fresh files, and every named
// tensor of every player. Values are raw float64, so save/load round-trips
// bit-exactly. Optimizer moments are not persisted.

struct CheckpointData {
    std::uint64_t seed = 0;
    std::string config_json;
    std::uint64_t num_classes = 0;
    std::vector<std::string> vocab_words;
    std::map<std::string, ParamSet> players;
};

namespace detail {

constexpr char kCkptMagic[8] = {'R', 'G', 'C', 'K', 'P', 'T', '0', '1'};

inline void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
inline void put_str(std::ostream& os, const std::string& s) {
    put_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string get_str(std::istream& is) {
    const std::uint64_t n = get_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const CheckpointData& ck) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(detail::kCkptMagic, sizeof(detail::kCkptMagic));
    detail::put_u64(os, ck.seed);
    detail::put_str(os, ck.config_json);
    detail::put_u64(os, ck.num_classes);
    detail::put_u64(os, ck.vocab_words.size());
    for (const auto& w : ck.vocab_words) detail::put_str(os, w);
    detail::put_u64(os, ck.players.size());
    for (const auto& [pname, pset] : ck.players) {
        detail::put_str(os, pname);
        detail::put_u64(os, pset.adam_step);
        detail::put_u64(os, pset.values.size());
        for (const auto& [tname, t] : pset.values) {
            detail::put_str(os, tname);
            detail::put_u64(os, t.rows);
            detail::put_u64(os, t.cols);
            os.write(reinterpret_cast<const char*>(t.data.data()),
                     static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        }
    }
    if (!os) throw std::runtime_error("write failure on checkpoint: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::string(magic, 8) != std::string(detail::kCkptMagic, 8)) {
        throw ParseError("not a checkpoint file: " + path);
    }
    CheckpointData ck;
    ck.seed = detail::get_u64(is);
    ck.config_json = detail::get_str(is);
    ck.num_classes = detail::get_u64(is);
    const std::uint64_t nv = detail::get_u64(is);
    ck.vocab_words.resize(nv);
    for (auto& w : ck.vocab_words) w = detail::get_str(is);
    const std::uint64_t np = detail::get_u64(is);
    for (std::uint64_t i = 0; i < np; ++i) {
        const std::string pname = detail::get_str(is);
        ParamSet& pset = ck.players[pname];
        pset.adam_step = detail::get_u64(is);
        const std::uint64_t nt = detail::get_u64(is);
        for (std::uint64_t j = 0; j < nt; ++j) {
            const std::string tname = detail::get_str(is);
            const std::uint64_t rows = detail::get_u64(is);
            const std::uint64_t cols = detail::get_u64(is);
            Tensor2& t = pset.add(tname, rows, cols);
            is.read(reinterpret_cast<char*>(t.data.data()),
                    static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        }
    }
    if (!is) throw ParseError("truncated checkpoint: " + path);
    return ck;
}

}  // namespace rgame
