#include "codemix/lid.hpp"

#include <cctype>
#include <set>

#include "codemix/error.hpp"
#include "codemix/utf8.hpp"

namespace codemix::lid {

const std::vector<std::string>& lid_slot_names() {
    static const std::vector<std::string> names = {
        "form", "lower", "prev", "next", "p1", "p2", "p3", "p4",
        "s1",   "s2",    "s3",   "s4",   "has_digit", "has_punct", "is_cap"};
    return names;
}

namespace {

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& ch : out)
        if (ch >= 'A' && ch <= 'Z') ch += 'a' - 'A';
    return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }

} // namespace

std::vector<std::string> extract_lid_features(const conllu::Sentence& sentence, int position) {
    int n = sentence.size();
    if (position < 0 || position >= n)
        throw ValidationError("token position " + std::to_string(position) + " out of range");
    const std::string& form = sentence.tokens[position].form;

    std::vector<std::string> values;
    values.reserve(lid_slot_names().size());
    values.push_back(form);
    values.push_back(ascii_lower(form));
    values.push_back(position > 0 ? sentence.tokens[position - 1].form : nn::kBos);
    values.push_back(position + 1 < n ? sentence.tokens[position + 1].form : nn::kEos);
    for (int k = 1; k <= 4; ++k) values.push_back(utf8::prefix(form, k));
    for (int k = 1; k <= 4; ++k) values.push_back(utf8::suffix(form, k));

    bool digit = false, punct = false;
    for (unsigned char ch : form) {
        if (std::isdigit(ch)) digit = true;
        if (ch < 128 && std::ispunct(ch)) punct = true;
    }
    values.push_back(flag(digit));
    values.push_back(flag(punct));
    values.push_back(flag(!form.empty() && form[0] >= 'A' && form[0] <= 'Z'));
    return values;
}

nn::FeedForwardModel build_lid_model(const std::vector<conllu::Sentence>& corpus,
                                     const LidModelConfig& config) {
    if (corpus.empty()) throw ValidationError("LID training corpus is empty");
    std::set<std::string> words = {nn::kBos, nn::kEos}, affixes;
    for (const auto& s : corpus)
        for (const auto& tok : s.tokens) {
            words.insert(tok.form);
            words.insert(ascii_lower(tok.form));
            for (int k = 1; k <= 4; ++k) {
                affixes.insert(utf8::prefix(tok.form, k));
                affixes.insert(utf8::suffix(tok.form, k));
            }
        }

    auto vocab_of = [](const std::set<std::string>& items) {
        std::vector<std::string> vocab = {nn::kUnknown};
        vocab.insert(vocab.end(), items.begin(), items.end());
        return vocab;
    };

    std::vector<nn::TableSpec> tables(3);
    tables[0].name = "word";
    tables[0].dim = config.pretrained ? config.pretrained->dimension : config.word_dim;
    tables[0].vocab = vocab_of(words);
    tables[0].pretrained = config.pretrained;
    tables[1].name = "affix";
    tables[1].dim = config.affix_dim;
    tables[1].vocab = vocab_of(affixes);
    tables[2].name = "shape";
    tables[2].dim = config.shape_dim;
    tables[2].vocab = {"0", "1"};

    std::vector<std::pair<std::string, std::string>> slots;
    for (const auto& name : lid_slot_names()) {
        std::string table = "affix";
        if (name == "form" || name == "lower" || name == "prev" || name == "next") table = "word";
        else if (name.rfind("has_", 0) == 0 || name == "is_cap") table = "shape";
        slots.emplace_back(name, table);
    }
    return nn::build_model("lid", tables, slots, conllu::language_tag_names(), config.hidden_size,
                           config.seed);
}

std::vector<nn::Example> build_lid_examples(const std::vector<conllu::Sentence>& corpus) {
    std::vector<nn::Example> examples;
    for (const auto& s : corpus)
        for (int i = 0; i < s.size(); ++i) {
            const auto& tok = s.tokens[i];
            if (!tok.lang)
                throw ValidationError("sentence '" + s.sent_id + "': token " + std::to_string(i + 1) +
                                      " has no gold language tag");
            examples.push_back({extract_lid_features(s, i), conllu::to_string(*tok.lang)});
        }
    if (examples.empty()) throw ValidationError("LID training corpus has no tokens");
    return examples;
}

void tag_languages(const nn::FeedForwardModel& model, conllu::Sentence& sentence) {
    for (int i = 0; i < sentence.size(); ++i) {
        int k = nn::predict(model, extract_lid_features(sentence, i));
        sentence.tokens[i].lang = conllu::parse_language_tag(model.labels[k]);
    }
}

} // namespace codemix::lid
