#pragma once

// Parser fixture corpus: a few well-formed model replies per task, each run
// through mutations that real models produce (prose around the payload,
// code fences, quote styles, layout changes) or that break the contract
// (truncation, missing keys, extra pairs, ordinal choices). Every fixture
// states the outcome the parser must produce.

#include <string>
#include <vector>

#include <json.hpp>

#include "seedforge/pipeline/instructions.hpp"

namespace seedforge::test {

enum class Expect { ok, parse_error, validation_error };

struct QaFixture {
    std::string name;
    std::string raw;
    Expect expect;
    std::vector<QaPair> pairs;
};

struct SummaryFixture {
    std::string name;
    std::string raw;
    Expect expect;
    SummaryPayload payload;
};

struct ConversationFixture {
    std::string name;
    std::string raw;
    Expect expect;
    ConversationPair pair;
};

struct McFixture {
    std::string name;
    std::string raw;
    Expect expect;
    std::string question;
    std::vector<std::string> choices;
    std::size_t correct = 0;
};

inline std::vector<std::vector<QaPair>> qa_bases() {
    return {
        {{"สงกรานต์ตรงกับวันที่เท่าไร", "13 เมษายน"},
         {"สงกรานต์มาจากภาษาใด", "ภาษาสันสกฤต"},
         {"คำว่าสงกรานต์แปลว่าอะไร", "การเคลื่อนย้าย"},
         {"ภาคเหนือเรียกสงกรานต์ว่าอะไร", "ปี๋ใหม่เมือง"},
         {"กิจกรรมใดทำกับผู้ใหญ่", "การรดน้ำดำหัว"}},
        {{"What is pad thai made from?", "Rice noodles, egg and tofu."},
         {"Where did it become popular?", "In Thailand during the 1930s."},
         {"Which sauce is used?", "Tamarind sauce."},
         {"Is it sweet?", "It is sweet, sour and salty."},
         {"How is it served?", "With lime and peanuts."}},
        {{"ช้างไทยมีกี่ชนิด", "สองชนิด"},
         {"ช้างเผือกสำคัญอย่างไร", "เป็นสัญลักษณ์ของพระมหากษัตริย์"},
         {"วันช้างไทยคือวันใด", "13 มีนาคม"},
         {"ช้างกินอะไร", "หญ้า ใบไม้ และผลไม้"},
         {"ช้าง's habitat อยู่ที่ใด", "ป่าเขตร้อน"}},
        {{"มวยไทยใช้อวัยวะกี่ส่วน", "แปดส่วน"},
         {"ไหว้ครูคืออะไร", "พิธีแสดงความเคารพครู"},
         {"เครื่องดนตรีประกอบคืออะไร", "ปี่ชวา กลองแขก และฉิ่ง"},
         {"มวยไทยมีชื่อเรียกอื่นว่าอะไร", "ศิลปะแห่งแปดอาวุธ"},
         {"นักมวยสวมอะไรที่ศีรษะ", "มงคล"}},
        {{"\"ส้มตำ\" มาจากภาคใด", "ภาคอีสาน"},
         {"วัตถุดิบหลักคืออะไร", "มะละกอดิบ"},
         {"รสชาติเป็นอย่างไร", "เปรี้ยว หวาน เค็ม เผ็ด"},
         {"กินคู่กับอะไร", "ข้าวเหนียวและไก่ย่าง"},
         {"ใช้ครกแบบใด", "ครกดินเผา"}},
    };
}

inline std::string qa_json(const std::vector<QaPair>& pairs, const std::string& qk = "question",
                           const std::string& ak = "answer") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : pairs) j.push_back({{qk, p.question}, {ak, p.answer}});
    return j.dump();
}

inline std::string python_style(const std::vector<QaPair>& pairs) {
    std::string s = "[";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) s += ", ";
        s += "{'question': '" + pairs[i].question + "', 'answer': '" + pairs[i].answer + "'}";
    }
    return s + "]";
}

inline std::vector<QaFixture> qa_corpus() {
    std::vector<QaFixture> out;
    int b = 0;
    for (const auto& base : qa_bases()) {
        const std::string tag = "qa" + std::to_string(b++) + "/";
        const std::string canon = qa_json(base);
        out.push_back({tag + "canonical", canon, Expect::ok, base});
        out.push_back({tag + "prose-prefix", "นี่คือคำถาม 5 ข้อ: " + canon, Expect::ok, base});
        out.push_back({tag + "prose-suffix", canon + "\nหวังว่าจะเป็นประโยชน์", Expect::ok, base});
        out.push_back({tag + "code-fence", "```json\n" + canon + "\n```", Expect::ok, base});
        out.push_back({tag + "python-quotes", python_style(base), Expect::ok, base});
        out.push_back({tag + "pretty", nlohmann::json::parse(canon).dump(2), Expect::ok, base});
        out.push_back({tag + "capital-keys", qa_json(base, "Question", "Answer"), Expect::ok, base});
        out.push_back({tag + "wrapped", "{\"questions\": " + canon + "}", Expect::ok, base});
        out.push_back({tag + "trailing-comma", canon.substr(0, canon.size() - 1) + ",]", Expect::ok, base});
        out.push_back({tag + "truncated", canon.substr(0, canon.size() / 2), Expect::parse_error, {}});
        out.push_back({tag + "renamed-keys", qa_json(base, "q", "a"), Expect::parse_error, {}});
        out.push_back({tag + "no-list", "ขออภัย ไม่สามารถสร้างคำถามได้", Expect::parse_error, {}});
        out.push_back({tag + "single-dict", nlohmann::json(
                           {{"question", base[0].question}, {"answer", base[0].answer}}).dump(),
                       Expect::parse_error, {}});
        auto blank = base;
        blank[2].answer = "";
        out.push_back({tag + "empty-answer", qa_json(blank), Expect::parse_error, {}});
    }
    return out;
}

inline std::vector<SummaryPayload> summary_bases() {
    return {
        {"- สงกรานต์คือปีใหม่ไทย\n- ตรงกับ 13 เมษายน\n- มีการรดน้ำดำหัว",
         "กรุณาสรุปข้อความต่อไปนี้เป็นหัวข้อย่อย"},
        {"ส้มตำเป็นอาหารอีสานที่ทำจากมะละกอดิบ มีรสเปรี้ยวหวานเค็มเผ็ด",
         "สรุปข้อความนี้เป็นย่อหน้า"},
        {"1. มวยไทยใช้แปดอาวุธ\n2. มีพิธีไหว้ครู\n3. ใช้ดนตรีประกอบ",
         "Please summarize in numbered lists format the following text passage"},
        {"ช้างเป็นสัตว์ประจำชาติไทย และมีความสำคัญทางประวัติศาสตร์",
         "ช่วยสรุปบทความ 'ช้างไทย' ให้หน่อย"},
        {"The festival marks the Thai new year and is celebrated with water.",
         "Summarize the passage in paragraphs format."},
    };
}

inline std::vector<SummaryFixture> summary_corpus() {
    std::vector<SummaryFixture> out;
    int b = 0;
    for (const auto& base : summary_bases()) {
        const std::string tag = "sum" + std::to_string(b++) + "/";
        const nlohmann::json j = {{"summary", base.summary}, {"instruction", base.instruction}};
        const std::string canon = j.dump();
        out.push_back({tag + "canonical", canon, Expect::ok, base});
        out.push_back({tag + "prose-prefix", "Here is the summary: " + canon, Expect::ok, base});
        out.push_back({tag + "code-fence", "```\n" + canon + "\n```", Expect::ok, base});
        out.push_back({tag + "pretty", j.dump(2), Expect::ok, base});
        out.push_back({tag + "key-order",
                       nlohmann::json({{"instruction", base.instruction}, {"summary", base.summary}})
                           .dump(),
                       Expect::ok, base});
        out.push_back({tag + "capital-keys",
                       nlohmann::json({{"Summary", base.summary}, {"Instruction", base.instruction}})
                           .dump(),
                       Expect::ok, base});
        {
            std::vector<std::string> items;
            std::size_t pos = 0;
            const std::string& s = base.summary;
            while (pos <= s.size()) {
                std::size_t eol = s.find('\n', pos);
                if (eol == std::string::npos) eol = s.size();
                items.push_back(s.substr(pos, eol - pos));
                pos = eol + 1;
            }
            out.push_back({tag + "list-summary",
                           nlohmann::json({{"summary", items}, {"instruction", base.instruction}}).dump(),
                           Expect::ok, base});
        }
        out.push_back({tag + "missing-instruction", nlohmann::json({{"summary", base.summary}}).dump(),
                       Expect::parse_error, {}});
        out.push_back({tag + "missing-summary",
                       nlohmann::json({{"instruction", base.instruction}}).dump(), Expect::parse_error,
                       {}});
        out.push_back({tag + "truncated", canon.substr(0, canon.size() - 3), Expect::parse_error, {}});
        out.push_back({tag + "plain-text", base.summary, Expect::parse_error, {}});
        out.push_back({tag + "empty-summary",
                       nlohmann::json({{"summary", ""}, {"instruction", base.instruction}}).dump(),
                       Expect::parse_error, {}});
    }
    return out;
}

inline std::vector<ConversationPair> conversation_bases() {
    return {
        {"ช่วงนี้อากาศร้อนมาก มีเมนูคลายร้อนแนะนำไหม", "ลองข้าวแช่ดูสิครับ เป็นอาหารไทยโบราณที่ช่วยคลายร้อนได้ดี"},
        {"What's a good Thai dessert for beginners?", "Mango sticky rice is a friendly start!"},
        {"เล่นน้ำสงกรานต์ที่ไหนดี", "ถนนข้าวสารคึกคักมาก แต่ถ้าชอบบรรยากาศสงบลองเชียงใหม่นะครับ"},
        {"อยากเริ่มเรียนมวยไทยต้องเตรียมอะไรบ้าง", "เริ่มจากรองเท้าวิ่งดีๆ ผ้าพันมือ และใจที่พร้อมเหนื่อยครับ"},
        {"Do you like durian?", "I can't taste, but many people call it the king of fruits!"},
    };
}

inline std::vector<ConversationFixture> conversation_corpus() {
    std::vector<ConversationFixture> out;
    int b = 0;
    for (const auto& base : conversation_bases()) {
        const std::string tag = "conv" + std::to_string(b++) + "/";
        const std::string& q = base.input;
        const std::string& a = base.output;
        out.push_back({tag + "canonical", "Input: " + q + " Output: " + a, Expect::ok, base});
        out.push_back({tag + "newlines", "Input: " + q + "\nOutput: " + a, Expect::ok, base});
        out.push_back({tag + "format-tags", "<format>Input: " + q + " Output: " + a + "</format>",
                       Expect::ok, base});
        out.push_back({tag + "bold-markers", "**Input:** " + q + "\n**Output:** " + a, Expect::ok, base});
        out.push_back({tag + "lowercase", "input: " + q + "\noutput: " + a, Expect::ok, base});
        out.push_back({tag + "crlf", "Input: " + q + "\r\nOutput: " + a + "\r\n", Expect::ok, base});
        out.push_back({tag + "blank-lines", "\n\nInput:\n" + q + "\n\nOutput:\n" + a + "\n\n", Expect::ok,
                       base});
        out.push_back({tag + "two-pairs",
                       "Input: " + q + " Output: " + a + "\nInput: อีกคำถาม Output: อีกคำตอบ",
                       Expect::parse_error, {}});
        out.push_back({tag + "missing-output", "Input: " + q, Expect::parse_error, {}});
        out.push_back({tag + "missing-input", "Output: " + a, Expect::parse_error, {}});
        out.push_back({tag + "reversed", "Output: " + a + " Input: " + q, Expect::parse_error, {}});
        out.push_back({tag + "empty-output", "Input: " + q + " Output:   ", Expect::parse_error, {}});
        out.push_back({tag + "no-markers", q + " " + a, Expect::parse_error, {}});
    }
    return out;
}

struct McBase {
    std::string question;
    std::vector<std::string> choices;
    std::size_t correct;
    std::string explanation;
};

inline std::vector<McBase> mc_bases() {
    return {
        {"สงกรานต์ตรงกับเดือนใด", {"เมษายน", "มกราคม", "ตุลาคม", "ธันวาคม"}, 0,
         "บริบทระบุว่าสงกรานต์ตรงกับกลางเดือนเมษายน"},
        {"ส้มตำมีต้นกำเนิดจากภาคใด", {"ภาคใต้", "ภาคอีสาน", "ภาคกลาง", "ภาคเหนือ"}, 1,
         "ข้อความกล่าวว่าส้มตำเป็นอาหารอีสาน"},
        {"Which instrument leads Muay Thai music?", {"Drum", "Flute", "Java pipe", "Gong"}, 2,
         "The context says the Java pipe carries the melody"},
        {"ช้างเผือกเป็นสัญลักษณ์ของอะไร", {"ความร่ำรวยของพ่อค้า", "ฤดูฝน", "การค้าขาย",
                                             "พระบารมีของพระมหากษัตริย์"},
         3, "ช้างเผือกถือเป็นสัตว์คู่บารมี"},
        {"ข้าวเหนียวมะม่วงนิยมราดด้วยอะไร", {"น้ำปลา", "กะทิ", "ซีอิ๊ว"}, 1,
         "ของหวานไทยนิยมใช้กะทิ"},
    };
}

inline std::string mc_lines(const McBase& b, const std::string& marker) {
    std::string s = "Question: " + b.question + "\nChoices:\n";
    for (const auto& c : b.choices) s += "- " + c + "\n";
    s += "Answer: " + b.explanation + " เหตุผล: ข้อมูลตรงกับบริบท " + marker + b.choices[b.correct];
    return s;
}

inline std::vector<McFixture> mc_corpus() {
    std::vector<McFixture> out;
    int n = 0;
    for (const auto& b : mc_bases()) {
        const std::string tag = "mc" + std::to_string(n++) + "/";
        auto ok = [&](const std::string& name, const std::string& raw) {
            out.push_back({tag + name, raw, Expect::ok, b.question, b.choices, b.correct});
        };
        auto bad = [&](const std::string& name, const std::string& raw, Expect e) {
            out.push_back({tag + name, raw, e, {}, {}, 0});
        };
        ok("canonical-th-marker", mc_lines(b, "คำตอบที่ถูกต้อง: "));
        ok("en-marker", mc_lines(b, "Correct Answer: "));
        ok("th-marker-kue", mc_lines(b, "คำตอบที่ถูกต้องคือ "));
        {
            std::string inl = "<format> Question: " + b.question + " Choices:";
            for (const auto& c : b.choices) inl += " - " + c;
            inl += " Answer: " + b.explanation + " Correct Answer: " + b.choices[b.correct] + " </format>";
            ok("inline", inl);
        }
        {
            std::string s = "Question: " + b.question + "\nChoices:\n";
            for (const auto& c : b.choices) s += "- [" + c + "]\n";
            s += "Answer: " + b.explanation + "\nคำตอบที่ถูกต้อง: " + b.choices[b.correct];
            ok("bracketed-choices", s);
        }
        {
            std::string s = "Question: " + b.question + "\nChoices:\n";
            for (const auto& c : b.choices) s += "- " + c + "\n";
            s += "Answer: " + b.explanation + "\n" + b.choices[b.correct];
            ok("last-line", s);
        }
        ok("bold", "**Question:** " + b.question + "\n**Choices:**\n- " + [&] {
            std::string s;
            for (std::size_t i = 0; i < b.choices.size(); ++i) s += (i ? "\n- " : "") + b.choices[i];
            return s;
        }() + "\n**Answer:** " + b.explanation + " คำตอบ: " + b.choices[b.correct]);
        ok("prose-prefix", "แน่นอน นี่คือคำถาม:\n" + mc_lines(b, "คำตอบที่ถูกต้อง: "));
        {
            std::string s = "Question: " + b.question + "\nChoices:\n";
            for (const auto& c : b.choices) s += "- " + c + "\n";
            s += "Answer: " + b.explanation + " คำตอบที่ถูกต้อง: " + b.choices[b.correct] + ".";
            ok("trailing-period", s);
        }
        {
            McBase one = b;
            one.choices = {b.choices[b.correct]};
            one.correct = 0;
            bad("one-choice", mc_lines(one, "คำตอบที่ถูกต้อง: "), Expect::parse_error);
        }
        {
            McBase ord = b;
            ord.choices.push_back("ถูกทุกข้อ");
            bad("ordinal-choice-th", mc_lines(ord, "คำตอบที่ถูกต้อง: "), Expect::validation_error);
        }
        {
            McBase ord = b;
            ord.choices.push_back("All of the above");
            ord.correct = ord.choices.size() - 1;
            bad("ordinal-choice-en", mc_lines(ord, "Correct Answer: "), Expect::validation_error);
        }
        bad("ordinal-answer",
            "Question: " + b.question + "\nChoices:\n- " + b.choices[0] + "\n- " + b.choices[1] +
                "\nAnswer: " + b.explanation + " คำตอบที่ถูกต้อง: ข้อแรก",
            Expect::validation_error);
        bad("answer-not-a-choice",
            "Question: " + b.question + "\nChoices:\n- " + b.choices[0] + "\n- " + b.choices[1] +
                "\nAnswer: " + b.explanation + " คำตอบที่ถูกต้อง: ไม่ทราบ",
            Expect::parse_error);
        {
            std::string s = mc_lines(b, "คำตอบที่ถูกต้อง: ");
            bad("missing-answer", s.substr(0, s.find("Answer:")), Expect::parse_error);
        }
        bad("two-questions",
            mc_lines(b, "คำตอบที่ถูกต้อง: ") + "\n" + mc_lines(b, "คำตอบที่ถูกต้อง: "),
            Expect::parse_error);
        bad("no-structure", b.question + " " + b.explanation, Expect::parse_error);
        {
            McBase dup = b;
            dup.choices.push_back(b.choices[0]);
            bad("duplicate-choice", mc_lines(dup, "คำตอบที่ถูกต้อง: "), Expect::parse_error);
        }
    }
    return out;
}

}  // namespace seedforge::test
