#include "codemix/pos.hpp"

#include <set>

#include "codemix/error.hpp"
#include "codemix/utf8.hpp"

namespace codemix::pos {

std::vector<std::string> pos_slot_names(bool multilingual) {
    std::vector<std::string> names = {"w_m2", "w_m1", "w0", "w_p1", "w_p2", "t_m1", "t_m2", "suf3"};
    if (multilingual) names.push_back("lg0");
    return names;
}

namespace {

std::string lang_value(const conllu::AnnotatedToken& tok) {
    if (tok.lang == conllu::LanguageTag::hi) return "hi";
    if (tok.lang == conllu::LanguageTag::en) return "en";
    return nn::kNull;
}

// Feature values for position i (0-based) of the token range [lo, hi]
// (0-based, inclusive). `tags` holds the tags already chosen (or gold, when
// teacher forcing) for the range's earlier positions.
std::vector<std::string> range_features(const conllu::Sentence& s, int lo, int hi, int i,
                                        const std::vector<std::string>& tags, bool multilingual) {
    auto word = [&](int j) -> std::string {
        if (j < lo) return nn::kBos;
        if (j > hi) return nn::kEos;
        return s.tokens[j].effective_form();
    };
    auto tag = [&](int j) -> std::string {
        if (j < lo) return nn::kBos;
        return tags[j - lo];
    };
    std::vector<std::string> values = {word(i - 2), word(i - 1), word(i),
                                       word(i + 1), word(i + 2), tag(i - 1), tag(i - 2),
                                       utf8::suffix(s.tokens[i].effective_form(), 3)};
    if (multilingual) values.push_back(lang_value(s.tokens[i]));
    return values;
}

bool is_multilingual(const nn::FeedForwardModel& model) {
    for (const auto& slot : model.slots)
        if (slot.name == "lg0") return true;
    return false;
}

} // namespace

nn::FeedForwardModel build_tagger_model(const std::vector<conllu::Sentence>& treebank,
                                        const TaggerModelConfig& config) {
    if (treebank.empty()) throw ValidationError("tagger training treebank is empty");
    std::set<std::string> words = {nn::kBos, nn::kEos}, suffixes, tags;
    for (const auto& s : treebank)
        for (const auto& tok : s.tokens) {
            words.insert(tok.effective_form());
            suffixes.insert(utf8::suffix(tok.effective_form(), 3));
            if (tok.upos.empty())
                throw ValidationError("sentence '" + s.sent_id + "': token " +
                                      std::to_string(tok.index) + " has no UPOS");
            tags.insert(tok.upos);
        }

    std::vector<nn::TableSpec> tables(3);
    tables[0].name = "word";
    tables[0].dim = config.pretrained ? config.pretrained->dimension : config.word_dim;
    tables[0].vocab = {nn::kUnknown};
    tables[0].vocab.insert(tables[0].vocab.end(), words.begin(), words.end());
    tables[0].pretrained = config.pretrained;
    tables[1].name = "tag";
    tables[1].dim = config.tag_dim;
    tables[1].vocab = {nn::kUnknown, nn::kBos};
    tables[1].vocab.insert(tables[1].vocab.end(), tags.begin(), tags.end());
    tables[2].name = "suffix";
    tables[2].dim = config.affix_dim;
    tables[2].vocab = {nn::kUnknown};
    tables[2].vocab.insert(tables[2].vocab.end(), suffixes.begin(), suffixes.end());
    if (config.multilingual) tables.push_back(nn::language_table_spec());

    std::vector<std::pair<std::string, std::string>> slots;
    for (const auto& name : pos_slot_names(config.multilingual)) {
        std::string table = "word";
        if (name[0] == 't') table = "tag";
        else if (name == "suf3") table = "suffix";
        else if (name == "lg0") table = "lang";
        slots.emplace_back(name, table);
    }
    std::vector<std::string> labels(tags.begin(), tags.end());
    return nn::build_model("pos", tables, slots, labels, config.hidden_size, config.seed);
}

std::vector<nn::Example> build_tagger_examples(const std::vector<conllu::Sentence>& treebank,
                                               bool multilingual) {
    std::vector<nn::Example> examples;
    for (const auto& s : treebank) {
        int n = s.size();
        std::vector<std::string> gold(n);
        for (int i = 0; i < n; ++i) gold[i] = s.tokens[i].upos;
        for (int i = 0; i < n; ++i)
            examples.push_back({range_features(s, 0, n - 1, i, gold, multilingual), gold[i]});
    }
    if (examples.empty()) throw ValidationError("tagger training treebank has no tokens");
    return examples;
}

void tag_range(const nn::FeedForwardModel& model, conllu::Sentence& sentence, int start, int end) {
    if (start < 1 || end > sentence.size() || start > end)
        throw ValidationError("bad tagging range " + std::to_string(start) + ".." + std::to_string(end));
    bool multi = is_multilingual(model);
    int lo = start - 1, hi = end - 1;
    std::vector<std::string> tags;
    tags.reserve(hi - lo + 1);
    for (int i = lo; i <= hi; ++i) {
        int k = nn::predict(model, range_features(sentence, lo, hi, i, tags, multi));
        tags.push_back(model.labels[k]);
        sentence.tokens[i].upos = tags.back();
    }
}

void tag_sentence(const nn::FeedForwardModel& model, conllu::Sentence& sentence) {
    if (sentence.size() > 0) tag_range(model, sentence, 1, sentence.size());
}

void tag_pos_monolingual(const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model,
                         conllu::Sentence& sentence, const strategy::FragmentSegmentation& seg) {
    for (const auto& frag : seg.fragments) {
        const auto& model = frag.lang == conllu::LanguageTag::hi ? hi_model : en_model;
        tag_range(model, sentence, frag.start, frag.end);
    }
}

void tag_pos_multilingual(const nn::FeedForwardModel& model, conllu::Sentence& sentence,
                          const strategy::FragmentSegmentation& seg) {
    conllu::Sentence resolved = strategy::resolve_languages(sentence, seg);
    tag_sentence(model, resolved);
    for (int i = 0; i < sentence.size(); ++i) sentence.tokens[i].upos = resolved.tokens[i].upos;
}

} // namespace codemix::pos
