#include "seedforge/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "seedforge/errors.hpp"
#include "seedforge/gateway/gateway.hpp"
#include "seedforge/simd/similarity.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

namespace {

using Counts = std::unordered_map<std::string, std::size_t>;

Counts ngram_counts(const Tokens& t, int n) {
    Counts c;
    const auto len = static_cast<std::size_t>(n);
    if (t.size() < len) return c;
    for (std::size_t i = 0; i + len <= t.size(); ++i) {
        std::string key = t[i];
        for (std::size_t k = 1; k < len; ++k) {
            key += '\x1f';
            key += t[i + k];
        }
        ++c[key];
    }
    return c;
}

std::size_t clipped(const Counts& pred, const Counts& ref) {
    std::size_t m = 0;
    for (const auto& [g, c] : pred) {
        if (auto it = ref.find(g); it != ref.end()) m += std::min(c, it->second);
    }
    return m;
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

Prf prf(std::size_t hits, std::size_t pred_total, std::size_t ref_total) {
    if (pred_total == 0 || ref_total == 0) return {};
    const double p = static_cast<double>(hits) / static_cast<double>(pred_total);
    const double r = static_cast<double>(hits) / static_cast<double>(ref_total);
    return {p, r, harmonic(p, r)};
}

// Positions in `b` that belong to one LCS of a and b.
std::vector<std::size_t> lcs_positions_in_b(const Tokens& a, const Tokens& b) {
    const std::size_t m = a.size(), n = b.size();
    std::vector<std::uint32_t> dp((m + 1) * (n + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (n + 1) + j]; };
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            at(i, j) = a[i - 1] == b[j - 1] ? at(i - 1, j - 1) + 1 : std::max(at(i - 1, j), at(i, j - 1));
        }
    }
    std::vector<std::size_t> out;
    std::size_t i = m, j = n;
    while (i > 0 && j > 0) {
        if (a[i - 1] == b[j - 1]) {
            out.push_back(j - 1);
            --i;
            --j;
        } else if (at(i - 1, j) >= at(i, j - 1)) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Tokens> sentences(std::string_view text, const Tokenizer& tok) {
    std::vector<Tokens> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto t = tok.tokenize(text.substr(pos, eol - pos));
        if (!t.empty()) out.push_back(std::move(t));
        pos = eol + 1;
    }
    return out;
}

double brevity_penalty(std::size_t pred_len, std::size_t ref_len) {
    if (pred_len == 0) return 0.0;
    if (pred_len >= ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(pred_len));
}

std::vector<char32_t> non_space(std::string_view s) {
    std::vector<char32_t> out;
    for (char32_t cp : utf8::decode(s)) {
        if (!utf8::is_space(cp)) out.push_back(cp);
    }
    return out;
}

std::map<std::u32string, std::size_t> char_ngrams(const std::vector<char32_t>& cs, std::size_t n) {
    std::map<std::u32string, std::size_t> out;
    for (std::size_t i = 0; i + n <= cs.size(); ++i) ++out[std::u32string(cs.begin() + i, cs.begin() + i + n)];
    return out;
}

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

}  // namespace

NgramOverlap ngram_overlap(const Tokens& pred, const Tokens& ref, int n) {
    if (n < 1) throw PreconditionError("n-gram order must be >= 1");
    const Counts p = ngram_counts(pred, n);
    const Counts r = ngram_counts(ref, n);
    NgramOverlap o;
    o.overlap = clipped(p, r);
    for (const auto& kv : p) o.pred_total += kv.second;
    for (const auto& kv : r) o.ref_total += kv.second;
    return o;
}

Prf rouge_n(const Tokens& pred, const Tokens& ref, int n) {
    const auto o = ngram_overlap(pred, ref, n);
    return prf(o.overlap, o.pred_total, o.ref_total);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (const auto& x : a) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = x == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

Prf rouge_l(const Tokens& pred, const Tokens& ref) {
    return prf(lcs_length(pred, ref), pred.size(), ref.size());
}

double rouge_lsum(std::string_view pred, std::string_view ref, const Tokenizer& tok) {
    const auto ps = sentences(pred, tok);
    const auto rs = sentences(ref, tok);
    Counts pred_left, ref_left;
    std::size_t pred_total = 0, ref_total = 0;
    for (const auto& s : ps) {
        for (const auto& t : s) ++pred_left[t], ++pred_total;
    }
    for (const auto& s : rs) {
        for (const auto& t : s) ++ref_left[t], ++ref_total;
    }
    std::size_t hits = 0;
    for (const auto& r : rs) {
        std::set<std::size_t> uni;
        for (const auto& p : ps) {
            for (std::size_t j : lcs_positions_in_b(p, r)) uni.insert(j);
        }
        for (std::size_t j : uni) {
            auto& pl = pred_left[r[j]];
            auto& rl = ref_left[r[j]];
            if (pl > 0 && rl > 0) {
                --pl;
                --rl;
                ++hits;
            }
        }
    }
    return prf(hits, pred_total, ref_total).f1;
}

double bleu(std::span<const std::pair<Tokens, Tokens>> corpus, int max_n) {
    if (corpus.empty()) throw PreconditionError("bleu: empty corpus");
    if (max_n < 1) throw PreconditionError("bleu: max_n must be >= 1");
    std::vector<std::size_t> matches(max_n, 0), totals(max_n, 0);
    std::size_t pred_len = 0, ref_len = 0;
    for (const auto& [pred, ref] : corpus) {
        pred_len += pred.size();
        ref_len += ref.size();
        for (int n = 1; n <= max_n; ++n) {
            const auto o = ngram_overlap(pred, ref, n);
            matches[n - 1] += o.overlap;
            totals[n - 1] += o.pred_total;
        }
    }
    double log_sum = 0.0;
    for (int n = 0; n < max_n; ++n) {
        if (matches[n] == 0 || totals[n] == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
    }
    return brevity_penalty(pred_len, ref_len) * std::exp(log_sum / max_n);
}

double sentence_bleu(const Tokens& pred, const Tokens& ref, int max_n) {
    if (max_n < 1) throw PreconditionError("bleu: max_n must be >= 1");
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const auto o = ngram_overlap(pred, ref, n);
        double p;
        if (n == 1) {
            if (o.overlap == 0) return 0.0;
            p = static_cast<double>(o.overlap) / static_cast<double>(o.pred_total);
        } else {
            p = static_cast<double>(o.overlap + 1) / static_cast<double>(o.pred_total + 1);
        }
        log_sum += std::log(p);
    }
    return brevity_penalty(pred.size(), ref.size()) * std::exp(log_sum / max_n);
}

double chrf(std::string_view pred, std::string_view ref, int max_n, double beta) {
    const auto p = non_space(pred);
    const auto r = non_space(ref);
    if (p.empty() && r.empty()) return 100.0;
    double psum = 0.0, rsum = 0.0;
    int orders = 0;
    for (int n = 1; n <= max_n; ++n) {
        const auto pg = char_ngrams(p, static_cast<std::size_t>(n));
        const auto rg = char_ngrams(r, static_cast<std::size_t>(n));
        if (pg.empty() || rg.empty()) continue;
        std::size_t hit = 0, pt = 0, rt = 0;
        for (const auto& [g, c] : pg) {
            pt += c;
            if (auto it = rg.find(g); it != rg.end()) hit += std::min(c, it->second);
        }
        for (const auto& kv : rg) rt += kv.second;
        psum += static_cast<double>(hit) / static_cast<double>(pt);
        rsum += static_cast<double>(hit) / static_cast<double>(rt);
        ++orders;
    }
    if (orders == 0) return 0.0;
    const double prec = psum / orders, rec = rsum / orders;
    const double b2 = beta * beta;
    if (prec + rec <= 0.0) return 0.0;
    return 100.0 * (1.0 + b2) * prec * rec / (b2 * prec + rec);
}

MeteorAlignment meteor_align(const Tokens& pred, const Tokens& ref) {
    const std::size_t m = pred.size(), n = ref.size();
    std::vector<bool> used_p(m, false), used_r(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::uint32_t> run((m + 1) * (n + 1));
    while (true) {
        // run(i, j): length of the shared unmatched run ending at pred i-1, ref j-1.
        std::size_t best = 0, bi = 0, bj = 0;
        for (std::size_t i = 1; i <= m; ++i) {
            for (std::size_t j = 1; j <= n; ++j) {
                std::uint32_t v = 0;
                if (!used_p[i - 1] && !used_r[j - 1] && pred[i - 1] == ref[j - 1]) {
                    v = run[(i - 1) * (n + 1) + (j - 1)] + 1;
                }
                run[i * (n + 1) + j] = v;
                // Longest first; ties go to the earliest start in pred, then ref.
                const std::size_t si = i - v, sj = j - v;
                if (v > best || (v == best && v > 0 && (si < bi || (si == bi && sj < bj)))) {
                    best = v;
                    bi = si;
                    bj = sj;
                }
            }
        }
        if (best == 0) break;
        for (std::size_t k = 0; k < best; ++k) {
            used_p[bi + k] = true;
            used_r[bj + k] = true;
            pairs.emplace_back(bi + k, bj + k);
        }
    }
    MeteorAlignment a;
    a.matches = pairs.size();
    if (pairs.empty()) return a;
    std::sort(pairs.begin(), pairs.end());
    a.chunks = 1;
    for (std::size_t k = 1; k < pairs.size(); ++k) {
        if (pairs[k].first != pairs[k - 1].first + 1 || pairs[k].second != pairs[k - 1].second + 1) ++a.chunks;
    }
    return a;
}

double meteor(const Tokens& pred, const Tokens& ref, const MeteorParams& prm) {
    const auto a = meteor_align(pred, ref);
    if (a.matches == 0) return 0.0;
    const double mm = static_cast<double>(a.matches);
    const double p = mm / static_cast<double>(pred.size());
    const double r = mm / static_cast<double>(ref.size());
    const double fmean = p * r / (prm.alpha * p + (1.0 - prm.alpha) * r);
    const double penalty = prm.gamma * std::pow(static_cast<double>(a.chunks) / mm, prm.beta);
    return fmean * (1.0 - penalty);
}

std::string squad_normalize(std::string_view text, const SquadOptions& opt) {
    std::string folded;
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_punct(cp)) continue;
        utf8::append(folded, utf8::fold_case(cp));
    }
    if (!opt.strip_english_articles) return utf8::collapse_whitespace(folded);
    std::string out;
    for (const auto& w : Tokenizer(TokenizerMode::whitespace).tokenize(folded)) {
        if (is_article(w)) continue;
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

double squad_f1(std::string_view pred, std::string_view ref, const Tokenizer& tok, const SquadOptions& opt) {
    const auto p = tok.tokenize(squad_normalize(pred, opt));
    const auto r = tok.tokenize(squad_normalize(ref, opt));
    if (p.empty() && r.empty()) return 1.0;
    if (p.empty() || r.empty()) return 0.0;
    return prf(clipped(ngram_counts(p, 1), ngram_counts(r, 1)), p.size(), r.size()).f1;
}

Prf bert_like_score(const Tokens& pred, const Tokens& ref, Gateway& gw) {
    if (!gw.supports_token_embeddings()) {
        throw CapabilityError("bert-like score needs token-level embeddings from the embedding provider");
    }
    if (pred.empty() && ref.empty()) return {1.0, 1.0, 1.0};
    if (pred.empty() || ref.empty()) return {};

    std::vector<std::string> vocab(pred.begin(), pred.end());
    vocab.insert(vocab.end(), ref.begin(), ref.end());
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    const auto vecs = gw.embed_tokens(vocab);
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < vocab.size(); ++i) slot.emplace(vocab[i], i);
    std::vector<double> norms(vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) norms[i] = std::sqrt(simd::squared_norm(vecs[i].values));

    // Similarity between vocab entries, clipped to [0, 1]; zero vectors match nothing.
    auto sim = [&](std::size_t a, std::size_t b) {
        if (a == b) return norms[a] > 0.0 ? 1.0 : 0.0;
        if (norms[a] == 0.0 || norms[b] == 0.0) return 0.0;
        return std::clamp(simd::dot(vecs[a].values, vecs[b].values) / (norms[a] * norms[b]), 0.0, 1.0);
    };
    auto greedy = [&](const Tokens& from, const Tokens& to) {
        double sum = 0.0;
        for (const auto& f : from) {
            double best = 0.0;
            for (const auto& t : to) best = std::max(best, sim(slot.at(f), slot.at(t)));
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    const double p = greedy(pred, ref);
    const double r = greedy(ref, pred);
    return {p, r, harmonic(p, r)};
}

}  // namespace seedforge
