#pragma once

#include <string>
#include <vector>

#include "codemix/conllu.hpp"
#include "codemix/kneser_ney.hpp"
#include "codemix/translit.hpp"

namespace codemix::norm {

// Per-token candidate lists, best transducer score first.
using CandidateLattice = std::vector<std::vector<translit::Candidate>>;

CandidateLattice build_lattice(const translit::TransducerModel& model,
                               const std::vector<std::string>& words, int beam);

// Picks one candidate per token maximizing the sum of trigram LM log
// probabilities, sum_i log p(w_i | w_{i-2} w_{i-1}), by exact dynamic
// programming over (previous, current) choice pairs — provably equal to brute
// force over the b^n combinations. Score ties resolve toward the sequence
// with lexicographically smallest candidate ranks. Returns one rank per token.
std::vector<int> decode_sentence(const CandidateLattice& lattice, const kn::TrigramLM& lm);

std::vector<std::string> decode_words(const CandidateLattice& lattice, const kn::TrigramLM& lm);

// Joint normalizer: Romanized-Hindi tokens get back-transliterated through
// the hi transducer + LM, English tokens go through the en pair. Tokens
// tagged ne/acro/univ (or untagged) pass through unchanged. Each maximal
// same-language run is decoded as one sequence. Results land in token.norm.
struct Normalizer {
    translit::TransducerModel hi_transducer;
    translit::TransducerModel en_transducer;
    kn::TrigramLM hi_lm;
    kn::TrigramLM en_lm;
    int beam = 5;

    void normalize(conllu::Sentence& sentence) const;
};

} // namespace codemix::norm
