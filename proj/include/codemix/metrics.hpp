#pragma once

#include <string>
#include <vector>

#include "codemix/conllu.hpp"

namespace codemix::metrics {

struct AttachmentScores {
    double uas = 0.0; // % tokens with the correct head
    double las = 0.0; // % tokens with the correct head and deprel
    int tokens = 0;   // tokens scored
};

// Compares predicted trees against gold over aligned corpora. Punctuation
// (gold UPOS == PUNCT) is scored unless ignore_punct is set.
AttachmentScores attachment_scores(const std::vector<conllu::Sentence>& gold,
                                   const std::vector<conllu::Sentence>& pred,
                                   bool ignore_punct = false);

struct LabelScore {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int count = 0; // gold occurrences
};

struct LabelReport {
    std::vector<LabelScore> labels; // sorted by label, absent labels omitted
    double accuracy = 0.0;
    int total = 0;
};

// Per-label precision/recall/F1 plus overall accuracy for aligned tag
// sequences (used for LID evaluation). Values are fractions in [0, 1].
LabelReport label_prf(const std::vector<std::string>& gold, const std::vector<std::string>& pred);

struct PosAccuracy {
    double hi = 0.0;    // accuracy over tokens gold-tagged hi
    double en = 0.0;    // accuracy over tokens gold-tagged en
    double total = 0.0; // over hi+en tokens (or all tokens with all_tokens)
    int hi_tokens = 0;
    int en_tokens = 0;
    int total_tokens = 0;
};

// POS accuracy grouped by the gold language tag. The total covers hi and en
// tokens only unless all_tokens is set. Fractions in [0, 1].
PosAccuracy pos_accuracy(const std::vector<conllu::Sentence>& gold,
                         const std::vector<conllu::Sentence>& pred, bool all_tokens = false);

} // namespace codemix::metrics
