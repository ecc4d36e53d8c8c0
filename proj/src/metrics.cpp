#include "codemix/metrics.hpp"

#include <map>
#include <set>

#include "codemix/error.hpp"

namespace codemix::metrics {

namespace {

std::string sentence_name(const conllu::Sentence& s, std::size_t position) {
    if (!s.sent_id.empty()) return s.sent_id;
    return "#" + std::to_string(position + 1);
}

void check_aligned(const std::vector<conllu::Sentence>& gold,
                   const std::vector<conllu::Sentence>& pred) {
    if (gold.size() != pred.size())
        throw ValidationError("corpora differ in sentence count (" + std::to_string(gold.size()) +
                              " vs " + std::to_string(pred.size()) + ")");
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i].size() != pred[i].size())
            throw ValidationError("sentence " + sentence_name(gold[i], i) +
                                  " differs in token count (" + std::to_string(gold[i].size()) +
                                  " vs " + std::to_string(pred[i].size()) + ")");
}

} // namespace

AttachmentScores attachment_scores(const std::vector<conllu::Sentence>& gold,
                                   const std::vector<conllu::Sentence>& pred, bool ignore_punct) {
    check_aligned(gold, pred);
    int total = 0, head_ok = 0, labeled_ok = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (std::size_t t = 0; t < gold[i].tokens.size(); ++t) {
            const auto& g = gold[i].tokens[t];
            const auto& p = pred[i].tokens[t];
            if (!g.head)
                throw ValidationError("sentence " + sentence_name(gold[i], i) +
                                      " has no gold head for token " + std::to_string(g.index));
            if (ignore_punct && g.upos == "PUNCT") continue;
            ++total;
            if (p.head && *p.head == *g.head) {
                ++head_ok;
                if (p.deprel == g.deprel) ++labeled_ok;
            }
        }
    }
    if (total == 0) throw ValidationError("no tokens to evaluate");
    AttachmentScores scores;
    scores.tokens = total;
    scores.uas = 100.0 * head_ok / total;
    scores.las = 100.0 * labeled_ok / total;
    return scores;
}

LabelReport label_prf(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
    if (gold.size() != pred.size())
        throw ValidationError("tag sequences differ in length (" + std::to_string(gold.size()) +
                              " vs " + std::to_string(pred.size()) + ")");
    if (gold.empty()) throw ValidationError("no tags to evaluate");

    std::map<std::string, int> tp, in_gold, in_pred;
    int correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ++in_gold[gold[i]];
        ++in_pred[pred[i]];
        if (gold[i] == pred[i]) {
            ++tp[gold[i]];
            ++correct;
        }
    }

    std::set<std::string> labels;
    for (const auto& [label, n] : in_gold) labels.insert(label);
    for (const auto& [label, n] : in_pred) labels.insert(label);

    LabelReport report;
    report.total = static_cast<int>(gold.size());
    report.accuracy = static_cast<double>(correct) / report.total;
    for (const auto& label : labels) {
        LabelScore s;
        s.label = label;
        s.count = in_gold.count(label) ? in_gold[label] : 0;
        int predicted = in_pred.count(label) ? in_pred[label] : 0;
        int hits = tp.count(label) ? tp[label] : 0;
        s.precision = predicted > 0 ? static_cast<double>(hits) / predicted : 0.0;
        s.recall = s.count > 0 ? static_cast<double>(hits) / s.count : 0.0;
        s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                            : 0.0;
        report.labels.push_back(std::move(s));
    }
    return report;
}

PosAccuracy pos_accuracy(const std::vector<conllu::Sentence>& gold,
                         const std::vector<conllu::Sentence>& pred, bool all_tokens) {
    check_aligned(gold, pred);
    int hi_ok = 0, en_ok = 0, extra_ok = 0, extra_total = 0;
    PosAccuracy acc;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (std::size_t t = 0; t < gold[i].tokens.size(); ++t) {
            const auto& g = gold[i].tokens[t];
            bool ok = g.upos == pred[i].tokens[t].upos;
            if (g.lang == conllu::LanguageTag::hi) {
                ++acc.hi_tokens;
                hi_ok += ok;
            } else if (g.lang == conllu::LanguageTag::en) {
                ++acc.en_tokens;
                en_ok += ok;
            } else {
                ++extra_total;
                extra_ok += ok;
            }
        }
    }
    acc.total_tokens = acc.hi_tokens + acc.en_tokens + (all_tokens ? extra_total : 0);
    if (acc.total_tokens == 0) throw ValidationError("no tokens to evaluate");
    acc.hi = acc.hi_tokens > 0 ? static_cast<double>(hi_ok) / acc.hi_tokens : 0.0;
    acc.en = acc.en_tokens > 0 ? static_cast<double>(en_ok) / acc.en_tokens : 0.0;
    acc.total =
        static_cast<double>(hi_ok + en_ok + (all_tokens ? extra_ok : 0)) / acc.total_tokens;
    return acc;
}

} // namespace codemix::metrics
