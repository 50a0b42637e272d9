#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rgame {

// Heuristic span extraction for multi-aspect review text. Reviews tend to
// introduce each aspect with a "<word> :" header; words heading that pattern
// more often than `freq_threshold` across the corpus become anchors, and the
// span for a target aspect runs from its anchor to the next anchor (or the end
// of the review).

struct AspectExtraction {
    std::set<std::string> anchors;
    std::vector<std::vector<std::string>> spans;  // one per review, possibly empty
};

inline AspectExtraction extract_aspect(const std::vector<std::vector<std::string>>& reviews,
                                       const std::set<std::string>& target_words,
                                       std::size_t freq_threshold) {
    std::map<std::string, std::size_t> header_counts;
    for (const auto& review : reviews) {
        for (std::size_t i = 0; i + 1 < review.size(); ++i) {
            if (review[i + 1] == ":") header_counts[review[i]] += 1;
        }
    }
    AspectExtraction out;
    for (const auto& [word, count] : header_counts) {
        if (count > freq_threshold) out.anchors.insert(word);
    }

    for (const auto& review : reviews) {
        std::vector<std::size_t> anchor_pos;
        for (std::size_t i = 0; i + 1 < review.size(); ++i) {
            if (review[i + 1] == ":" && out.anchors.count(review[i])) anchor_pos.push_back(i);
        }
        std::vector<std::string> span;
        for (std::size_t k = 0; k < anchor_pos.size(); ++k) {
            if (!target_words.count(review[anchor_pos[k]])) continue;
            const std::size_t begin = anchor_pos[k] + 2;  // skip the anchor and the colon
            const std::size_t end = (k + 1 < anchor_pos.size()) ? anchor_pos[k + 1] : review.size();
            for (std::size_t i = begin; i < end && i < review.size(); ++i) span.push_back(review[i]);
            break;
        }
        out.spans.push_back(std::move(span));
    }
    return out;
}

}  // namespace rgame
