#include "seedforge/gateway/mock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "seedforge/util/hash.hpp"
#include "seedforge/util/rng.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

const std::vector<std::string>& mock_vocabulary() {
    static const std::vector<std::string> words = {
        "ข้าว", "น้ำ", "บ้าน", "วัด", "ตลาด", "ประเพณี", "อาหาร", "เพลง", "ภาษา",
        "ประวัติศาสตร์", "เทศกาล", "สงกรานต์", "ลอยกระทง", "ครอบครัว", "โรงเรียน",
        "วิทยาศาสตร์", "คณิตศาสตร์", "ปรัชญา", "ธรรมชาติ", "ภูเขา", "ทะเล", "แม่น้ำ",
        "เมือง", "ชนบท", "การเดินทาง", "สุขภาพ", "กีฬา", "มวยไทย", "ศิลปะ", "ดนตรี",
        "วรรณคดี", "นิทาน", "ชาวนา", "ช้าง", "ผลไม้", "มะม่วง", "ทุเรียน", "ส้มตำ",
        "ต้มยำ", "แกงเขียวหวาน", "ขนมไทย", "ผ้าไหม", "หัตถกรรม", "พระพุทธรูป", "ประชาชน",
        "เศรษฐกิจ", "การค้า", "เทคโนโลยี", "คอมพิวเตอร์", "อินเทอร์เน็ต", "โทรศัพท์",
        "หนังสือ", "ห้องสมุด", "นักเรียน", "ครู", "มหาวิทยาลัย", "การศึกษา", "ความรู้",
        "ความคิด", "ความสุข", "มิตรภาพ", "ความรัก", "การทำงาน", "อาชีพ", "เงิน", "ธนาคาร",
        "สภาพอากาศ", "ฝน", "ฤดูร้อน", "ฤดูหนาว", "ป่าไม้", "สัตว์ป่า", "นก", "ปลา",
        "เกษตรกรรม", "การเกษตร", "พลังงาน", "ไฟฟ้า", "รถไฟ", "เครื่องบิน", "ถนน",
        "สะพาน", "พิพิธภัณฑ์", "โบราณสถาน", "อยุธยา", "สุโขทัย", "เชียงใหม่", "กรุงเทพ",
        "ภาคอีสาน", "ภาคใต้", "ชายหาด", "เกาะ", "การท่องเที่ยว", "โรงแรม", "ร้านอาหาร",
        "กาแฟ", "ชา", "สมุนไพร", "ยา", "โรงพยาบาล", "แพทย์", "การออกกำลังกาย", "โยคะ",
        "ดาราศาสตร์", "ดวงดาว", "ดวงจันทร์", "ดวงอาทิตย์", "ฟิสิกส์", "เคมี", "ชีววิทยา",
        "พันธุกรรม", "ภูมิศาสตร์", "แผนที่", "กฎหมาย", "รัฐบาล", "การเลือกตั้ง",
        "สิ่งแวดล้อม", "ขยะ", "การรีไซเคิล", "มลพิษ", "ภาพยนตร์", "ละคร", "การ์ตูน",
        "เกม", "ปริศนา", "คำคม", "ภูมิปัญญา", "ชุมชน", "อาสาสมัคร", "ความปลอดภัย"};
    return words;
}

namespace {

std::uint64_t request_seed(const GenRequest& req) {
    std::uint64_t s = fnv1a64(req.prompt);
    s = splitmix64(s ^ std::bit_cast<std::uint64_t>(req.temperature));
    return splitmix64(s ^ req.seed.value_or(0));
}

std::string words(Rng& rng, std::size_t lo, std::size_t hi) {
    const auto& vocab = mock_vocabulary();
    const std::size_t n = lo + rng.uniform_index(hi - lo + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += vocab[rng.uniform_index(vocab.size())];
    }
    return out;
}

std::string sentence(Rng& rng) { return words(rng, 6, 12); }

std::string paragraph(Rng& rng, std::size_t sentences) {
    std::string out;
    for (std::size_t i = 0; i < sentences; ++i) {
        if (i) out += ' ';
        out += sentence(rng);
    }
    return out;
}

std::string between(const std::string& s, const std::string& open, const std::string& close) {
    const auto a = s.find(open);
    if (a == std::string::npos) return {};
    const auto b = s.find(close, a + open.size());
    if (b == std::string::npos) return {};
    return s.substr(a + open.size(), b - a - open.size());
}

// A short span of context words, so answers are grounded in the context.
std::string context_snippet(Rng& rng, const std::string& context) {
    std::vector<std::string> toks;
    std::istringstream ss(context);
    for (std::string w; ss >> w;) toks.push_back(w);
    if (toks.size() < 3) return sentence(rng);
    const std::size_t len = std::min<std::size_t>(toks.size(), 3 + rng.uniform_index(4));
    const std::size_t start = rng.uniform_index(toks.size() - len + 1);
    std::string out;
    for (std::size_t i = start; i < start + len; ++i) {
        if (i > start) out += ' ';
        out += toks[i];
    }
    return out;
}

std::string topic_list(Rng& rng) {
    nlohmann::json topics = nlohmann::json::array();
    for (int i = 0; i < 20; ++i) topics.push_back(words(rng, 2, 3));
    const std::string list = topics.dump(-1, ' ', false);
    // Some replies carry a short preamble, as real models often do.
    if (rng.bernoulli(0.1)) return "นี่คือหัวข้อ: " + list;
    return list;
}

std::string closed_qa(Rng& rng, const std::string& prompt) {
    static const std::regex count_re(R"(Generate (\d+) questions)");
    std::smatch m;
    int n = 5;
    if (std::regex_search(prompt, m, count_re)) n = std::stoi(m[1]);
    const std::string ctx = between(prompt, "<context>", "</context>");
    nlohmann::json pairs = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        pairs.push_back({{"question", words(rng, 4, 8) + " อะไร?"},
                         {"answer", context_snippet(rng, ctx) + " " + words(rng, 2, 5)}});
    }
    return pairs.dump(-1, ' ', false);
}

std::string summary(Rng& rng, const std::string& prompt) {
    const std::string style = between(prompt, "summary in ", " format");
    std::string body;
    const std::size_t items = 2 + rng.uniform_index(3);
    for (std::size_t i = 0; i < items; ++i) {
        if (style == "bullet points") {
            body += "- " + sentence(rng) + "\n";
        } else if (style == "numbered lists") {
            body += std::to_string(i + 1) + ". " + sentence(rng) + "\n";
        } else {
            body += sentence(rng) + " ";
        }
    }
    nlohmann::json j = {{"summary", utf8::trim(body)},
                        {"instruction", "กรุณาสรุปข้อความต่อไปนี้ " + words(rng, 2, 4)}};
    return j.dump(-1, ' ', false);
}

std::string conversation(Rng& rng) {
    return "Input: " + words(rng, 5, 10) + " ไหม? Output: " + paragraph(rng, 2);
}

std::string multiple_choice(Rng& rng) {
    std::vector<std::string> choices;
    while (choices.size() < 4) {
        std::string c = words(rng, 2, 3);
        const bool clash = std::any_of(choices.begin(), choices.end(), [&](const std::string& o) {
            return o.find(c) != std::string::npos || c.find(o) != std::string::npos;
        });
        if (!clash) choices.push_back(std::move(c));
    }
    // The generator favors putting the right answer first.
    const std::size_t correct = rng.bernoulli(0.7) ? 0 : rng.uniform_index(4);
    std::string out = "Question: " + words(rng, 5, 9) + " คืออะไร?\nChoices:\n";
    for (const auto& c : choices) out += "- " + c + "\n";
    out += "Answer: คำอธิบาย " + sentence(rng) + " เหตุผล " + sentence(rng) +
           " คำตอบที่ถูกต้อง: " + choices[correct];
    return out;
}

std::vector<float> unit_direction(std::uint64_t seed, std::size_t dim) {
    Rng rng(seed);
    std::vector<float> v(dim);
    double norm = 0;
    for (auto& x : v) {
        x = static_cast<float>(rng.uniform01() * 2.0 - 1.0);
        norm += static_cast<double>(x) * x;
    }
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& x : v) x = static_cast<float>(x * inv);
    return v;
}

}  // namespace

std::string MockGenerator::complete(const GenRequest& req) {
    req.validate();
    Rng rng(request_seed(req));
    const std::string& p = req.prompt;
    if (p.rfind("echo:", 0) == 0) return p.substr(5);
    if (p.find("completely random topics") != std::string::npos) return topic_list(rng);
    if (p.find("questions focusing on different aspects") != std::string::npos) return closed_qa(rng, p);
    if (p.find("Generate a concise summary") != std::string::npos) return summary(rng, p);
    if (p.find("Generate a conversation between a user") != std::string::npos) return conversation(rng);
    if (p.find("Generate a multiple-choice question") != std::string::npos) return multiple_choice(rng);
    return paragraph(rng, 3 + rng.uniform_index(3));
}

std::string ScriptedGenerator::complete(const GenRequest& req) {
    std::lock_guard lock(mu_);
    seen_.push_back(req);
    if (responses_.empty()) throw ProviderError("scripted generator exhausted", false);
    std::string r = std::move(responses_.front());
    responses_.pop_front();
    return r;
}

std::vector<GenRequest> ScriptedGenerator::requests() const {
    std::lock_guard lock(mu_);
    return seen_;
}

std::size_t ScriptedGenerator::calls() const {
    std::lock_guard lock(mu_);
    return seen_.size();
}

EmbeddingVector MockEmbedder::token_vector(const std::string& token) const {
    return EmbeddingVector{unit_direction(fnv1a64(token), dimension_)};
}

EmbeddingVector MockEmbedder::embed_one(const std::string& text) const {
    std::vector<double> acc(dimension_, 0.0);
    auto add = [&](const std::vector<float>& dir) {
        for (std::size_t i = 0; i < dimension_; ++i) acc[i] += dir[i];
    };
    add(unit_direction(0xb1a5ULL, dimension_));
    std::string token;
    auto flush = [&] {
        if (!token.empty()) add(unit_direction(fnv1a64(token), dimension_));
        token.clear();
    };
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_space(cp) || utf8::is_punct(cp)) {
            flush();
        } else {
            utf8::append(token, utf8::fold_case(cp));
        }
    }
    flush();
    double norm = 0;
    for (double x : acc) norm += x * x;
    const double inv = 1.0 / std::sqrt(norm);
    EmbeddingVector out;
    out.values.resize(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) out.values[i] = static_cast<float>(acc[i] * inv);
    return out;
}

std::vector<EmbeddingVector> MockEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

std::vector<EmbeddingVector> MockEmbedder::embed_tokens(std::span<const std::string> tokens) {
    std::vector<EmbeddingVector> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(token_vector(t));
    return out;
}

std::vector<EmbeddingVector> TableEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        const auto it = table_.find(t);
        if (it == table_.end()) throw ProtocolError("table-embedder: no vector for '" + t + "'");
        out.push_back(it->second);
    }
    return out;
}

std::string MockTranslator::translate(const std::string& text, const std::string& source_lang,
                                      const std::string& target_lang) {
    if (text.empty()) throw PreconditionError("translate: empty text");
    if (!languages_.contains(source_lang) || !languages_.contains(target_lang) ||
        source_lang == target_lang) {
        throw ConfigError("language", "unsupported language pair " + source_lang + ">" + target_lang);
    }
    return target_lang + "⟨" + text + "⟩";
}

std::vector<std::string> MockParaphraser::paraphrase(const std::string& text, int count,
                                                     std::uint64_t seed) {
    if (count < 1) throw PreconditionError("paraphrase: count must be >= 1");
    std::vector<std::string> toks;
    std::istringstream ss(text);
    for (std::string w; ss >> w;) toks.push_back(w);
    std::vector<std::string> out;
    for (int k = 1; k <= count; ++k) {
        std::string body;
        if (!toks.empty()) {
            const std::size_t shift = derive_seed(seed, "rotate", static_cast<std::uint64_t>(k)) %
                                      toks.size();
            for (std::size_t i = 0; i < toks.size(); ++i) {
                if (i) body += ' ';
                body += toks[(i + shift) % toks.size()];
            }
        } else {
            body = text;
        }
        out.push_back("p" + std::to_string(k) + "⟨" + body + "⟩");
    }
    return out;
}

std::vector<WikiArticleRef> MockWiki::search(const std::string& query, int limit) {
    const std::uint64_t h = fnv1a64(query);
    // One query in sixteen has no hits.
    if (h % 16 == 0) return {};
    const int hits = std::min(limit, 10);
    std::vector<WikiArticleRef> refs;
    for (int i = 0; i < hits; ++i) {
        const auto page_id = static_cast<std::int64_t>(derive_seed(h, "page", i) >> 17);
        std::string title = query + " (" + std::to_string(i + 1) + ")";
        refs.push_back({std::move(title), page_id, i + 1});
    }
    return refs;
}

std::string MockWiki::fetch_wikitext(const WikiArticleRef& ref) {
    Rng rng(static_cast<std::uint64_t>(ref.page_id) ^ fnv1a64(ref.title));
    std::string text = "'''" + ref.title + "''' " + paragraph(rng, 2) + "<ref>อ้างอิง</ref>\n";
    const std::size_t sections = 1 + rng.uniform_index(4);
    for (std::size_t s = 0; s < sections; ++s) {
        text += "\n== " + words(rng, 1, 2) + " ==\n";
        text += paragraph(rng, 2 + rng.uniform_index(2)) + " [[" + words(rng, 1, 1) + "]]\n";
    }
    return text;
}

std::vector<WikiArticleRef> FixtureWiki::search(const std::string& query, int limit) {
    const auto it = searches_.find(query);
    if (it == searches_.end()) return {};
    std::vector<WikiArticleRef> out = it->second;
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.relevance_rank < b.relevance_rank;
    });
    if (out.size() > static_cast<std::size_t>(limit)) out.resize(static_cast<std::size_t>(limit));
    return out;
}

std::string FixtureWiki::fetch_wikitext(const WikiArticleRef& ref) {
    const auto it = pages_.find(ref.page_id);
    if (it == pages_.end()) throw NotFoundError("page not found: " + ref.title);
    return it->second;
}

}  // namespace seedforge
