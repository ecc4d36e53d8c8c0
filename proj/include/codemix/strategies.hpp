#pragma once

#include <string>
#include <vector>

#include "codemix/conllu.hpp"
#include "codemix/fragments.hpp"
#include "codemix/nn.hpp"
#include "codemix/parser.hpp"

namespace codemix::strategy {

struct InterpolationConfig {
    double lambda_m = 0.75; // weight of the matrix-language model
    std::vector<std::string> pos_set = {"ADP", "AUX", "PART", "VERB"};
};

// Matrix language of one configuration: of the top-2 stack and top-2 buffer
// nodes (ROOT and missing positions excluded), keep those whose UPOS is in
// pos_set and take the majority fragment language; ties and the empty set
// fall back to the sentence's matrix language.
conllu::LanguageTag configuration_matrix_language(const parser::Configuration& c,
                                                  const conllu::Sentence& sentence,
                                                  const FragmentSegmentation& seg,
                                                  const std::vector<std::string>& pos_set);

// Throws ModelError unless both parsers share one transition inventory.
void check_compatible(const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model);

// Parse with the sentence matrix language's model only.
conllu::Sentence parse_monolingual_baseline(const nn::FeedForwardModel& hi_model,
                                            const nn::FeedForwardModel& en_model,
                                            const conllu::Sentence& sentence);

// At every configuration take argmax over legal transitions of
// lambda_m * f(c_matrix) + (1 - lambda_m) * f(c_subordinate), the matrix
// model chosen per configuration.
conllu::Sentence parse_interpolated(const nn::FeedForwardModel& hi_model,
                                    const nn::FeedForwardModel& en_model,
                                    const conllu::Sentence& sentence,
                                    const InterpolationConfig& config = {});

// Single combined model with per-token language-tag vectors resolved through
// the fragment segmentation.
conllu::Sentence parse_multilingual(const nn::FeedForwardModel& model,
                                    const conllu::Sentence& sentence);

enum class MultipassMode {
    fragment_wise,     // pass 1: every fragment; pass 2: fragment roots
    subordinate_first, // pass 1: subordinate fragments; pass 2: matrix tokens + their roots
};

conllu::Sentence parse_multipass(const nn::FeedForwardModel& hi_model,
                                 const nn::FeedForwardModel& en_model,
                                 const conllu::Sentence& sentence, MultipassMode mode);

} // namespace codemix::strategy
