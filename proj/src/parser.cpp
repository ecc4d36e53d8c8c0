#include "codemix/parser.hpp"

#include <algorithm>
#include <set>

#include "codemix/error.hpp"

namespace codemix::parser {

std::string transition_name(const Transition& t) {
    switch (t.kind) {
        case TransitionKind::Shift: return "shift";
        case TransitionKind::Reduce: return "reduce";
        case TransitionKind::LeftArc: return "left_arc:" + t.label;
        case TransitionKind::RightArc: return "right_arc:" + t.label;
    }
    throw Error("unreachable transition kind");
}

Transition parse_transition(const std::string& name) {
    if (name == "shift") return {TransitionKind::Shift, ""};
    if (name == "reduce") return {TransitionKind::Reduce, ""};
    if (name.rfind("left_arc:", 0) == 0 && name.size() > 9)
        return {TransitionKind::LeftArc, name.substr(9)};
    if (name.rfind("right_arc:", 0) == 0 && name.size() > 10)
        return {TransitionKind::RightArc, name.substr(10)};
    throw ValidationError("unknown transition '" + name + "'");
}

Configuration::Configuration(int num_words_)
    : num_words(num_words_), stack{0}, next(1), head(num_words_ + 1, -1),
      deprel(num_words_ + 1), left_child(num_words_ + 1, -1), right_child(num_words_ + 1, -1) {
    if (num_words_ < 0) throw ValidationError("negative sentence length");
}

int Configuration::stack_node(int k) const {
    int i = static_cast<int>(stack.size()) - 1 - k;
    return i >= 0 ? stack[i] : -1;
}

int Configuration::buffer_node(int k) const {
    int i = next + k;
    return i <= num_words ? i : -1;
}

std::vector<Arc> Configuration::arcs() const {
    std::vector<Arc> out;
    for (int d = 1; d <= num_words; ++d)
        if (head[d] >= 0) out.push_back({head[d], d, deprel[d]});
    return out;
}

void Configuration::add_arc(int h, int d, const std::string& label) {
    head[d] = h;
    deprel[d] = label;
    if (d < h && (left_child[h] < 0 || d < left_child[h])) left_child[h] = d;
    if (d > h && (right_child[h] < 0 || d > right_child[h])) right_child[h] = d;
}

bool is_legal(const Configuration& c, TransitionKind kind) {
    int s0 = c.stack.back();
    switch (kind) {
        case TransitionKind::Shift: return !c.buffer_empty();
        case TransitionKind::LeftArc: return !c.buffer_empty() && s0 != 0 && c.head[s0] < 0;
        case TransitionKind::RightArc: return !c.buffer_empty();
        case TransitionKind::Reduce: return s0 != 0 && c.head[s0] >= 0;
    }
    return false;
}

std::vector<TransitionKind> legal_transitions(const Configuration& c) {
    std::vector<TransitionKind> out;
    for (TransitionKind k : {TransitionKind::Shift, TransitionKind::LeftArc, TransitionKind::RightArc,
                             TransitionKind::Reduce})
        if (is_legal(c, k)) out.push_back(k);
    return out;
}

void apply_transition(Configuration& c, const Transition& t) {
    if (!is_legal(c, t.kind))
        throw ValidationError("illegal transition '" + transition_name(t) + "' (stack " +
                              std::to_string(c.stack_size()) + ", buffer " +
                              std::to_string(c.buffer_size()) + ")");
    switch (t.kind) {
        case TransitionKind::Shift:
            c.stack.push_back(c.next++);
            break;
        case TransitionKind::LeftArc:
            c.add_arc(c.next, c.stack.back(), t.label);
            c.stack.pop_back();
            break;
        case TransitionKind::RightArc:
            c.add_arc(c.stack.back(), c.next, t.label);
            c.stack.push_back(c.next++);
            break;
        case TransitionKind::Reduce:
            c.stack.pop_back();
            break;
    }
}

namespace {

// Reports the first crossing arc pair of a non-projective tree.
void check_projective(const std::vector<int>& heads) {
    int n = static_cast<int>(heads.size()) - 1;
    for (int d1 = 1; d1 <= n; ++d1) {
        int a1 = std::min(heads[d1], d1), b1 = std::max(heads[d1], d1);
        for (int d2 = d1 + 1; d2 <= n; ++d2) {
            int a2 = std::min(heads[d2], d2), b2 = std::max(heads[d2], d2);
            bool cross = (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1);
            if (cross)
                throw ValidationError("non-projective tree: arc " + std::to_string(heads[d1]) + "->" +
                                      std::to_string(d1) + " crosses arc " + std::to_string(heads[d2]) +
                                      "->" + std::to_string(d2));
        }
    }
}

} // namespace

std::vector<Transition> oracle_sequence(const std::vector<int>& heads,
                                        const std::vector<std::string>& labels) {
    int n = static_cast<int>(heads.size()) - 1;
    if (n < 0 || labels.size() != heads.size())
        throw ValidationError("oracle needs aligned head and label arrays");
    for (int i = 1; i <= n; ++i)
        if (heads[i] < 0 || heads[i] > n || heads[i] == i)
            throw ValidationError("word " + std::to_string(i) + " has invalid head " +
                                  std::to_string(heads[i]));
    check_projective(heads);

    Configuration c(n);
    std::vector<Transition> seq;
    while (!c.buffer_empty()) {
        int s0 = c.stack.back();
        int b0 = c.next;
        Transition t;
        if (s0 != 0 && heads[s0] == b0) {
            t = {TransitionKind::LeftArc, labels[s0]};
        } else if (heads[b0] == s0) {
            t = {TransitionKind::RightArc, labels[b0]};
        } else {
            bool reduce = c.head[s0] >= 0;
            if (reduce) {
                reduce = false;
                for (std::size_t i = 0; i + 1 < c.stack.size(); ++i) {
                    int k = c.stack[i];
                    if (heads[b0] == k || (k != 0 && heads[k] == b0)) {
                        reduce = true;
                        break;
                    }
                }
            }
            t = reduce ? Transition{TransitionKind::Reduce, ""} : Transition{TransitionKind::Shift, ""};
        }
        apply_transition(c, t);
        seq.push_back(std::move(t));
    }
    return seq;
}

std::vector<Transition> oracle_sequence(const conllu::Sentence& gold) {
    int n = static_cast<int>(gold.tokens.size());
    std::vector<int> heads(n + 1, 0);
    std::vector<std::string> labels(n + 1);
    for (int i = 1; i <= n; ++i) {
        const auto& tok = gold.tokens[i - 1];
        if (!tok.head)
            throw ValidationError("sentence '" + gold.sent_id + "': word " + std::to_string(i) +
                                  " has no gold head");
        heads[i] = *tok.head;
        labels[i] = tok.deprel;
    }
    return oracle_sequence(heads, labels);
}

namespace {

const std::vector<std::string> kNodeNames = {"s0", "s1", "s2",  "s3",  "b0",  "b1", "b2",
                                             "b3", "s0l", "s0r", "s1l", "s1r", "b0l"};
const std::vector<std::string> kChildNodeNames = {"s0l", "s0r", "s1l", "s1r", "b0l"};

std::vector<std::string> make_feature_names() {
    std::vector<std::string> names;
    for (const char* group : {"word", "pos", "lang"})
        for (const auto& node : kNodeNames) names.push_back(std::string(group) + ":" + node);
    for (const auto& node : kChildNodeNames) names.push_back("deprel:" + node);
    return names;
}

} // namespace

const std::vector<std::string>& parse_feature_names() {
    static const std::vector<std::string> names = make_feature_names();
    return names;
}

std::vector<std::string> parser_slot_names(bool multilingual) {
    if (multilingual) return parse_feature_names();
    std::vector<std::string> names;
    for (const auto& name : parse_feature_names())
        if (name.rfind("lang:", 0) != 0) names.push_back(name);
    return names;
}

std::vector<std::string> extract_parse_features(const Configuration& c,
                                                const conllu::Sentence& sentence) {
    // The 13 nodes in kNodeNames order.
    int s0 = c.stack_node(0), s1 = c.stack_node(1);
    int b0 = c.buffer_node(0);
    auto child = [&c](int node, const std::vector<int>& side) { return node > 0 ? side[node] : -1; };
    int nodes[13] = {s0,
                     s1,
                     c.stack_node(2),
                     c.stack_node(3),
                     b0,
                     c.buffer_node(1),
                     c.buffer_node(2),
                     c.buffer_node(3),
                     child(s0, c.left_child),
                     child(s0, c.right_child),
                     child(s1, c.left_child),
                     child(s1, c.right_child),
                     child(b0, c.left_child)};

    std::vector<std::string> values;
    values.reserve(parse_feature_names().size());
    for (int node : nodes) { // word
        if (node < 0) values.push_back(nn::kNull);
        else if (node == 0) values.push_back(nn::kRoot);
        else values.push_back(sentence.tokens[node - 1].effective_form());
    }
    for (int node : nodes) { // pos
        if (node < 0) values.push_back(nn::kNull);
        else if (node == 0) values.push_back(nn::kRoot);
        else {
            const std::string& upos = sentence.tokens[node - 1].upos;
            values.push_back(upos.empty() ? nn::kNull : upos);
        }
    }
    for (int node : nodes) { // lang
        if (node <= 0) {
            values.push_back(nn::kNull);
            continue;
        }
        auto lang = sentence.tokens[node - 1].lang;
        if (lang == conllu::LanguageTag::hi) values.push_back("hi");
        else if (lang == conllu::LanguageTag::en) values.push_back("en");
        else values.push_back(nn::kNull);
    }
    int children[5] = {nodes[8], nodes[9], nodes[10], nodes[11], nodes[12]};
    for (int node : children) values.push_back(node < 0 ? nn::kNull : c.deprel[node]);
    return values;
}

std::vector<std::string> transition_label_inventory(const std::vector<conllu::Sentence>& treebank) {
    std::set<std::string> labels;
    for (const auto& s : treebank)
        for (const auto& tok : s.tokens)
            if (!tok.deprel.empty()) labels.insert(tok.deprel);
    if (labels.empty()) throw ValidationError("treebank has no dependency labels");
    std::vector<std::string> inventory = {"shift", "reduce"};
    for (const auto& l : labels) inventory.push_back("left_arc:" + l);
    for (const auto& l : labels) inventory.push_back("right_arc:" + l);
    return inventory;
}

conllu::Sentence parse_with_scorer(const conllu::Sentence& sentence,
                                   const std::vector<std::string>& inventory,
                                   const TransitionScorer& scorer) {
    std::vector<Transition> transitions;
    transitions.reserve(inventory.size());
    for (const auto& name : inventory) transitions.push_back(parse_transition(name));

    int n = static_cast<int>(sentence.tokens.size());
    Configuration c(n);
    while (!c.is_terminal()) {
        if (c.buffer_empty()) {
            // Drain: everything scorable needs a buffer; fall back to ROOT.
            if (is_legal(c, TransitionKind::Reduce)) {
                apply_transition(c, {TransitionKind::Reduce, ""});
            } else {
                c.add_arc(0, c.stack.back(), "root");
                c.stack.pop_back();
            }
            continue;
        }
        Eigen::VectorXd scores = scorer(c);
        if (scores.size() != static_cast<Eigen::Index>(transitions.size()))
            throw ValidationError("scorer returned " + std::to_string(scores.size()) +
                                  " scores for an inventory of " + std::to_string(transitions.size()));
        int best = -1;
        for (int i = 0; i < static_cast<int>(transitions.size()); ++i) {
            if (!is_legal(c, transitions[i].kind)) continue;
            if (best < 0 || scores[i] > scores[best]) best = i;
        }
        apply_transition(c, transitions[best]);
    }

    conllu::Sentence out = sentence;
    for (int i = 1; i <= n; ++i) {
        out.tokens[i - 1].head = c.head[i];
        out.tokens[i - 1].deprel = c.deprel[i];
    }
    return out;
}

std::vector<int> slot_feature_indexes(const nn::FeedForwardModel& model) {
    const auto& names = parse_feature_names();
    std::vector<int> indexes;
    indexes.reserve(model.slots.size());
    for (const auto& slot : model.slots) {
        auto it = std::find(names.begin(), names.end(), slot.name);
        if (it == names.end())
            throw ModelError("model slot '" + slot.name + "' is not a parser feature");
        indexes.push_back(static_cast<int>(it - names.begin()));
    }
    return indexes;
}

conllu::Sentence greedy_parse(const nn::FeedForwardModel& model, const conllu::Sentence& sentence) {
    std::vector<int> indexes = slot_feature_indexes(model);
    TransitionScorer scorer = [&model, &indexes, &sentence](const Configuration& c) {
        std::vector<std::string> all = extract_parse_features(c, sentence);
        std::vector<std::string> values;
        values.reserve(indexes.size());
        for (int i : indexes) values.push_back(all[i]);
        return nn::forward(model, values);
    };
    return parse_with_scorer(sentence, model.labels, scorer);
}

nn::FeedForwardModel build_parser_model(const std::vector<conllu::Sentence>& treebank,
                                        const ParserModelConfig& config) {
    if (treebank.empty()) throw ValidationError("parser training treebank is empty");
    std::set<std::string> words, pos, deprels;
    for (const auto& s : treebank)
        for (const auto& tok : s.tokens) {
            words.insert(tok.effective_form());
            if (!tok.upos.empty()) pos.insert(tok.upos);
            if (!tok.deprel.empty()) deprels.insert(tok.deprel);
        }

    auto with_specials = [](const std::set<std::string>& items, bool root) {
        std::vector<std::string> vocab = {nn::kNull, nn::kUnknown};
        if (root) vocab.push_back(nn::kRoot);
        vocab.insert(vocab.end(), items.begin(), items.end());
        return vocab;
    };

    std::vector<nn::TableSpec> tables;
    nn::TableSpec word;
    word.name = "word";
    word.dim = config.pretrained ? config.pretrained->dimension : config.word_dim;
    word.vocab = with_specials(words, true);
    word.pretrained = config.pretrained;
    tables.push_back(std::move(word));
    nn::TableSpec postable;
    postable.name = "pos";
    postable.dim = config.pos_dim;
    postable.vocab = with_specials(pos, true);
    tables.push_back(std::move(postable));
    nn::TableSpec rel;
    rel.name = "deprel";
    rel.dim = config.deprel_dim;
    rel.vocab = with_specials(deprels, false);
    tables.push_back(std::move(rel));
    if (config.multilingual) tables.push_back(nn::language_table_spec());

    std::vector<std::pair<std::string, std::string>> slots;
    for (const auto& name : parser_slot_names(config.multilingual)) {
        std::string table = name.substr(0, name.find(':'));
        slots.emplace_back(name, table);
    }
    return nn::build_model("parser", tables, slots, transition_label_inventory(treebank),
                           config.hidden_size, config.seed);
}

TrainingData build_parser_examples(const std::vector<conllu::Sentence>& treebank, bool multilingual) {
    std::vector<int> keep;
    const auto& names = parse_feature_names();
    std::vector<std::string> wanted = parser_slot_names(multilingual);
    for (const auto& name : wanted)
        keep.push_back(static_cast<int>(std::find(names.begin(), names.end(), name) - names.begin()));

    TrainingData data;
    for (const auto& sentence : treebank) {
        if (!conllu::is_projective(sentence)) {
            ++data.skipped_nonprojective;
            continue;
        }
        std::vector<Transition> seq = oracle_sequence(sentence);
        Configuration c(static_cast<int>(sentence.tokens.size()));
        for (const auto& t : seq) {
            std::vector<std::string> all = extract_parse_features(c, sentence);
            nn::Example ex;
            ex.values.reserve(keep.size());
            for (int i : keep) ex.values.push_back(all[i]);
            ex.gold = transition_name(t);
            data.examples.push_back(std::move(ex));
            apply_transition(c, t);
        }
        ++data.sentences_used;
    }
    if (data.sentences_used == 0)
        throw ValidationError("no projective sentences in the training treebank");
    return data;
}

} // namespace codemix::parser
