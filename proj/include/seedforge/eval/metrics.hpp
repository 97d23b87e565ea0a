#pragma once

// Reference-based text metrics. Token-level metrics take pre-tokenized
// input so the tokenizer choice stays with the caller.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seedforge/eval/tokenizer.hpp"

namespace seedforge {

class Gateway;

using Tokens = std::vector<std::string>;

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Clipped n-gram overlap with the totals it is divided by.
struct NgramOverlap {
    std::size_t overlap = 0;
    std::size_t pred_total = 0;
    std::size_t ref_total = 0;
};

NgramOverlap ngram_overlap(const Tokens& pred, const Tokens& ref, int n);

// Zero when either side has no n-grams.
Prf rouge_n(const Tokens& pred, const Tokens& ref, int n);
Prf rouge_l(const Tokens& pred, const Tokens& ref);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

// Summary-level LCS: texts are split into sentences on newlines and each
// reference sentence is scored by the union of its LCS hits against every
// prediction sentence, clipped by token counts. Returns F1.
double rouge_lsum(std::string_view pred, std::string_view ref, const Tokenizer& tok);

// Corpus BLEU: clipped n-gram precisions pooled over all pairs, geometric
// mean, brevity penalty on pooled lengths. No smoothing.
double bleu(std::span<const std::pair<Tokens, Tokens>> corpus, int max_n = 4);

// Sentence BLEU with add-one smoothing on orders above one.
double sentence_bleu(const Tokens& pred, const Tokens& ref, int max_n = 4);

// chrF in [0, 100]: whitespace removed, character n-grams for n = 1..max_n,
// precision and recall averaged over the orders both sides have, then
// F-beta.
double chrf(std::string_view pred, std::string_view ref, int max_n = 6, double beta = 2.0);

struct MeteorParams {
    double alpha = 0.9;
    double beta = 3.0;
    double gamma = 0.5;
};

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

// Exact-match unigram alignment with the most matches, built from the
// longest shared runs first to keep chunks few.
MeteorAlignment meteor_align(const Tokens& pred, const Tokens& ref);
double meteor(const Tokens& pred, const Tokens& ref, const MeteorParams& p = {});

struct SquadOptions {
    // Drop a/an/the tokens (ASCII only). Off by default.
    bool strip_english_articles = false;
};

// Case-fold, strip punctuation, collapse whitespace, then bag-of-tokens F1.
// Both sides empty after normalization scores 1.
std::string squad_normalize(std::string_view text, const SquadOptions& opt = {});
double squad_f1(std::string_view pred, std::string_view ref, const Tokenizer& tok,
                const SquadOptions& opt = {});

// Greedy token matching over contextless token vectors from the gateway's
// embedder. Cosines are clipped at 0. Both sides empty scores 1, one side
// empty scores 0. Throws CapabilityError without token-level embeddings.
Prf bert_like_score(const Tokens& pred, const Tokens& ref, Gateway& gw);

}  // namespace seedforge
