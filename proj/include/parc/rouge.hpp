#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "parc/errors.hpp"
#include "parc/text.hpp"

namespace parc {

struct RougeComponent {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const RougeComponent& other) const = default;
};

struct RougeScores {
    RougeComponent r1;
    RougeComponent r2;
    RougeComponent rl;
    RougeComponent rlsum;

    bool operator==(const RougeScores& other) const = default;
};

namespace rouge_detail {

inline RougeComponent component(double hits, double candidate_total, double reference_total) {
    RougeComponent c;
    c.precision = candidate_total == 0.0 ? 0.0 : hits / candidate_total;
    c.recall = reference_total == 0.0 ? 0.0 : hits / reference_total;
    c.f1 = (c.precision + c.recall) == 0.0
               ? 0.0
               : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    return c;
}

inline RougeComponent ngram_overlap(const std::vector<std::string>& candidate,
                                    const std::vector<std::string>& reference, std::size_t n) {
    auto count_ngrams = [n](const std::vector<std::string>& tokens) {
        std::map<std::vector<std::string>, std::size_t> counts;
        if (tokens.size() >= n) {
            for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
                std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                              tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
                ++counts[std::move(gram)];
            }
        }
        return counts;
    };
    auto cand = count_ngrams(candidate);
    auto ref = count_ngrams(reference);
    std::size_t overlap = 0;
    std::size_t cand_total = 0;
    std::size_t ref_total = 0;
    for (const auto& [gram, count] : cand) {
        cand_total += count;
        auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    for (const auto& [gram, count] : ref) ref_total += count;
    return component(static_cast<double>(overlap), static_cast<double>(cand_total),
                     static_cast<double>(ref_total));
}

inline std::vector<std::vector<std::size_t>> lcs_table(const std::vector<std::string>& a,
                                                       const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                dp[i][j] = dp[i - 1][j - 1] + 1;
            } else {
                dp[i][j] = std::max(dp[i - 1][j], dp[i][j - 1]);
            }
        }
    }
    return dp;
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    return lcs_table(a, b)[a.size()][b.size()];
}

// Canonical backtrace: always take a token match; on ties prefer moving up
// the reference axis. The matched-position set this produces is part of the
// R-LSum definition, since multiple longest subsequences can exist.
inline std::vector<std::size_t> lcs_positions(const std::vector<std::string>& ref,
                                              const std::vector<std::string>& cand) {
    std::vector<std::size_t> positions;
    if (ref.empty() || cand.empty()) return positions;
    auto dp = lcs_table(ref, cand);
    std::size_t i = ref.size();
    std::size_t j = cand.size();
    while (i > 0 && j > 0) {
        if (ref[i - 1] == cand[j - 1]) {
            positions.push_back(i - 1);
            --i;
            --j;
        } else if (dp[i][j - 1] > dp[i - 1][j]) {
            --j;
        } else {
            --i;
        }
    }
    std::reverse(positions.begin(), positions.end());
    return positions;
}

// Summary-level LCS: per reference sentence, union the LCS-matched
// positions against every candidate sentence; count hits with per-token
// clipping so repeated tokens are not double-credited.
inline RougeComponent summary_level_lcs(const std::vector<std::vector<std::string>>& ref_sents,
                                        const std::vector<std::vector<std::string>>& cand_sents) {
    std::size_t ref_total = 0;
    std::size_t cand_total = 0;
    std::map<std::string, std::size_t> ref_counts;
    std::map<std::string, std::size_t> cand_counts;
    for (const auto& s : ref_sents) {
        ref_total += s.size();
        for (const auto& t : s) ++ref_counts[t];
    }
    for (const auto& s : cand_sents) {
        cand_total += s.size();
        for (const auto& t : s) ++cand_counts[t];
    }

    std::size_t hits = 0;
    for (const auto& ref_sentence : ref_sents) {
        std::vector<bool> in_union(ref_sentence.size(), false);
        for (const auto& cand_sentence : cand_sents) {
            for (std::size_t pos : lcs_positions(ref_sentence, cand_sentence)) {
                in_union[pos] = true;
            }
        }
        for (std::size_t pos = 0; pos < ref_sentence.size(); ++pos) {
            if (!in_union[pos]) continue;
            const std::string& token = ref_sentence[pos];
            if (ref_counts[token] > 0 && cand_counts[token] > 0) {
                ++hits;
                --ref_counts[token];
                --cand_counts[token];
            }
        }
    }
    return component(static_cast<double>(hits), static_cast<double>(cand_total),
                     static_cast<double>(ref_total));
}

}  // namespace rouge_detail

// ROUGE-1/2, ROUGE-L over the full token sequences, and ROUGE-LSum over
// newline-separated sentences. Empty candidate scores 0 everywhere; an
// empty reference (after tokenization) is an error.
inline RougeScores rouge_scores(const std::string& candidate, const std::string& reference) {
    using namespace rouge_detail;

    std::vector<std::string> ref_tokens = tokenize_for_metrics(reference);
    if (ref_tokens.empty()) {
        throw Error(ErrorCode::EmptyReference, "reference is empty after tokenization");
    }
    std::vector<std::string> cand_tokens = tokenize_for_metrics(candidate);

    RougeScores scores;
    scores.r1 = ngram_overlap(cand_tokens, ref_tokens, 1);
    scores.r2 = ngram_overlap(cand_tokens, ref_tokens, 2);
    scores.rl = component(static_cast<double>(lcs_length(cand_tokens, ref_tokens)),
                          static_cast<double>(cand_tokens.size()),
                          static_cast<double>(ref_tokens.size()));

    auto tokenize_sentences = [](const std::string& text) {
        std::vector<std::vector<std::string>> out;
        for (const std::string& line : split_sentences(text)) {
            std::vector<std::string> tokens = tokenize_for_metrics(line);
            if (!tokens.empty()) out.push_back(std::move(tokens));
        }
        return out;
    };
    scores.rlsum = summary_level_lcs(tokenize_sentences(reference), tokenize_sentences(candidate));
    return scores;
}

// Extractive baseline: the first `n` tokens of the input, re-joined with
// single spaces. Tokenization matches the metric tokenizer so the baseline
// and its ROUGE evaluation agree on token boundaries.
inline std::string lead_n(const std::string& text, std::size_t n = 64) {
    std::vector<std::string> tokens = tokenize_for_metrics(text);
    std::size_t take = std::min(n, tokens.size());
    std::string out;
    for (std::size_t i = 0; i < take; ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace parc
