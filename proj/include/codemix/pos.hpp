#pragma once

#include <string>
#include <vector>

#include "codemix/conllu.hpp"
#include "codemix/fragments.hpp"
#include "codemix/nn.hpp"

namespace codemix::pos {

// w_m2, w_m1, w0, w_p1, w_p2, t_m1, t_m2, suf3 (+ lg0 when multilingual)
std::vector<std::string> pos_slot_names(bool multilingual);

struct TaggerModelConfig {
    int word_dim = 80;
    int tag_dim = 20;
    int affix_dim = 20;
    int hidden_size = 200;
    bool multilingual = false;
    const emb::EmbeddingTable* pretrained = nullptr;
    std::uint64_t seed = 1;
};

nn::FeedForwardModel build_tagger_model(const std::vector<conllu::Sentence>& treebank,
                                        const TaggerModelConfig& config);

// Teacher-forced examples (previous-tag features come from gold tags).
std::vector<nn::Example> build_tagger_examples(const std::vector<conllu::Sentence>& treebank,
                                               bool multilingual);

// Greedy left-to-right pass over tokens [start, end] (1-based, inclusive)
// treated as a standalone sequence: word windows and previous-tag features
// pad at the range edges. Whether the lang slot is fed depends on the model.
void tag_range(const nn::FeedForwardModel& model, conllu::Sentence& sentence, int start, int end);

// Whole-sentence greedy pass.
void tag_sentence(const nn::FeedForwardModel& model, conllu::Sentence& sentence);

// Fragment-wise monolingual tagging: each fragment goes to its language's
// model as a standalone sequence.
void tag_pos_monolingual(const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model,
                         conllu::Sentence& sentence, const strategy::FragmentSegmentation& seg);

// One pass over the whole sentence; every token's language feature is its
// fragment-resolved hi/en tag.
void tag_pos_multilingual(const nn::FeedForwardModel& model, conllu::Sentence& sentence,
                          const strategy::FragmentSegmentation& seg);

} // namespace codemix::pos
