#include "codemix/strategies.hpp"

#include <algorithm>

#include "codemix/error.hpp"

namespace codemix::strategy {

conllu::LanguageTag configuration_matrix_language(const parser::Configuration& c,
                                                  const conllu::Sentence& sentence,
                                                  const FragmentSegmentation& seg,
                                                  const std::vector<std::string>& pos_set) {
    int nodes[4] = {c.stack_node(0), c.stack_node(1), c.buffer_node(0), c.buffer_node(1)};
    int hi = 0, en = 0;
    for (int node : nodes) {
        if (node <= 0) continue; // ROOT and missing positions don't vote
        const auto& upos = sentence.tokens[node - 1].upos;
        if (std::find(pos_set.begin(), pos_set.end(), upos) == pos_set.end()) continue;
        if (seg.token_language(node) == conllu::LanguageTag::hi) ++hi;
        else ++en;
    }
    if (hi > en) return conllu::LanguageTag::hi;
    if (en > hi) return conllu::LanguageTag::en;
    return seg.matrix_language;
}

void check_compatible(const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model) {
    if (hi_model.labels != en_model.labels)
        throw ModelError("parser pair has mismatched transition inventories (" +
                         std::to_string(hi_model.labels.size()) + " vs " +
                         std::to_string(en_model.labels.size()) + " labels)");
}

namespace {

const nn::FeedForwardModel& model_for(conllu::LanguageTag lang, const nn::FeedForwardModel& hi_model,
                                      const nn::FeedForwardModel& en_model) {
    return lang == conllu::LanguageTag::hi ? hi_model : en_model;
}

} // namespace

conllu::Sentence parse_monolingual_baseline(const nn::FeedForwardModel& hi_model,
                                            const nn::FeedForwardModel& en_model,
                                            const conllu::Sentence& sentence) {
    FragmentSegmentation seg = segment_fragments(sentence);
    return parser::greedy_parse(model_for(seg.matrix_language, hi_model, en_model), sentence);
}

conllu::Sentence parse_interpolated(const nn::FeedForwardModel& hi_model,
                                    const nn::FeedForwardModel& en_model,
                                    const conllu::Sentence& sentence,
                                    const InterpolationConfig& config) {
    check_compatible(hi_model, en_model);
    if (config.lambda_m < 0.0 || config.lambda_m > 1.0)
        throw ValidationError("lambda_m must lie in [0, 1]");
    FragmentSegmentation seg = segment_fragments(sentence);
    std::vector<int> hi_idx = parser::slot_feature_indexes(hi_model);
    std::vector<int> en_idx = parser::slot_feature_indexes(en_model);

    auto probs = [&sentence](const nn::FeedForwardModel& m, const std::vector<int>& idx,
                             const std::vector<std::string>& all) {
        std::vector<std::string> values;
        values.reserve(idx.size());
        for (int i : idx) values.push_back(all[i]);
        return nn::forward(m, values);
    };

    parser::TransitionScorer scorer = [&](const parser::Configuration& c) {
        std::vector<std::string> all = parser::extract_parse_features(c, sentence);
        bool hi_matrix =
            configuration_matrix_language(c, sentence, seg, config.pos_set) == conllu::LanguageTag::hi;
        Eigen::VectorXd fm = probs(hi_matrix ? hi_model : en_model, hi_matrix ? hi_idx : en_idx, all);
        Eigen::VectorXd fs = probs(hi_matrix ? en_model : hi_model, hi_matrix ? en_idx : hi_idx, all);
        return Eigen::VectorXd(config.lambda_m * fm + (1.0 - config.lambda_m) * fs);
    };
    return parser::parse_with_scorer(sentence, hi_model.labels, scorer);
}

conllu::Sentence parse_multilingual(const nn::FeedForwardModel& model,
                                    const conllu::Sentence& sentence) {
    FragmentSegmentation seg = segment_fragments(sentence);
    conllu::Sentence parsed = parser::greedy_parse(model, resolve_languages(sentence, seg));
    conllu::Sentence out = sentence;
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        out.tokens[i].head = parsed.tokens[i].head;
        out.tokens[i].deprel = parsed.tokens[i].deprel;
    }
    return out;
}

namespace {

// Copies the chosen tokens (1-based original indices) into a standalone
// sentence, clearing any parse annotation.
conllu::Sentence make_subsentence(const conllu::Sentence& s, const std::vector<int>& orig) {
    conllu::Sentence sub;
    sub.sent_id = s.sent_id;
    for (std::size_t k = 0; k < orig.size(); ++k) {
        conllu::AnnotatedToken tok = s.tokens[static_cast<std::size_t>(orig[k]) - 1];
        tok.index = static_cast<int>(k) + 1;
        tok.head.reset();
        tok.deprel.clear();
        sub.tokens.push_back(std::move(tok));
    }
    return sub;
}

// Installs a standalone fragment parse back into `out` and returns the
// fragment root's original index. Extra pass-1 roots (greedy parsing can
// attach several tokens to ROOT) hang off the first root with label "dep".
int install_fragment_parse(conllu::Sentence& out, const conllu::Sentence& parsed,
                           const std::vector<int>& orig) {
    int root = -1;
    for (std::size_t k = 0; k < orig.size(); ++k)
        if (*parsed.tokens[k].head == 0) {
            root = orig[k];
            break;
        }
    for (std::size_t k = 0; k < orig.size(); ++k) {
        int h = *parsed.tokens[k].head;
        auto& tok = out.tokens[static_cast<std::size_t>(orig[k]) - 1];
        if (h == 0) {
            if (orig[k] == root) {
                tok.head = 0; // provisional; pass 2 reattaches and relabels
                tok.deprel = parsed.tokens[k].deprel;
            } else {
                tok.head = root;
                tok.deprel = "dep";
            }
        } else {
            tok.head = orig[static_cast<std::size_t>(h) - 1];
            tok.deprel = parsed.tokens[k].deprel;
        }
    }
    return root;
}

} // namespace

conllu::Sentence parse_multipass(const nn::FeedForwardModel& hi_model,
                                 const nn::FeedForwardModel& en_model,
                                 const conllu::Sentence& sentence, MultipassMode mode) {
    check_compatible(hi_model, en_model);
    FragmentSegmentation seg = segment_fragments(sentence);
    if (seg.fragments.size() == 1) return parse_monolingual_baseline(hi_model, en_model, sentence);

    const auto& matrix_model = model_for(seg.matrix_language, hi_model, en_model);
    conllu::Sentence out = sentence;
    std::vector<int> pass2; // original indices making up the reduced sentence

    for (const auto& frag : seg.fragments) {
        bool parse_now = mode == MultipassMode::fragment_wise || frag.lang != seg.matrix_language;
        if (!parse_now) {
            for (int i = frag.start; i <= frag.end; ++i) pass2.push_back(i);
            continue;
        }
        std::vector<int> orig;
        for (int i = frag.start; i <= frag.end; ++i) orig.push_back(i);
        conllu::Sentence parsed =
            parser::greedy_parse(model_for(frag.lang, hi_model, en_model), make_subsentence(sentence, orig));
        pass2.push_back(install_fragment_parse(out, parsed, orig));
    }

    conllu::Sentence parsed2 = parser::greedy_parse(matrix_model, make_subsentence(sentence, pass2));
    for (std::size_t k = 0; k < pass2.size(); ++k) {
        int h = *parsed2.tokens[k].head;
        auto& tok = out.tokens[static_cast<std::size_t>(pass2[k]) - 1];
        tok.head = h == 0 ? 0 : pass2[static_cast<std::size_t>(h) - 1];
        tok.deprel = parsed2.tokens[k].deprel;
    }
    return out;
}

} // namespace codemix::strategy
