#pragma once

#include <vector>

#include "codemix/conllu.hpp"

namespace codemix::strategy {

struct Fragment {
    int start = 0; // 1-based token index, inclusive
    int end = 0;   // inclusive
    conllu::LanguageTag lang = conllu::LanguageTag::hi; // hi or en only

    int size() const { return end - start + 1; }
    bool operator==(const Fragment&) const = default;
};

struct FragmentSegmentation {
    std::vector<Fragment> fragments; // partition of [1..n], adjacent languages differ
    conllu::LanguageTag matrix_language = conllu::LanguageTag::hi;
    std::vector<int> fragment_of; // size n+1; [0] = -1 (ROOT)

    conllu::LanguageTag token_language(int index) const {
        return fragments[fragment_of[index]].lang;
    }
    conllu::LanguageTag subordinate_language() const {
        return matrix_language == conllu::LanguageTag::hi ? conllu::LanguageTag::en
                                                          : conllu::LanguageTag::hi;
    }
};

// Maximal runs of identical hi/en tags. Tokens tagged univ/ne/acro adopt the
// language of the preceding fragment (sentence-initial ones adopt the
// following fragment's). Matrix language: strict majority of hi vs en tagged
// tokens; ties go to hi. Errors if the sentence has no hi/en token or a token
// is untagged.
FragmentSegmentation segment_fragments(const conllu::Sentence& sentence);

// Copy of the sentence with every token's lang replaced by its fragment's
// resolved hi/en language.
conllu::Sentence resolve_languages(const conllu::Sentence& sentence,
                                   const FragmentSegmentation& seg);

// Stamps `tag` on every token that has no language tag yet (used to mark
// monolingual treebanks before multilingual training).
void stamp_language(std::vector<conllu::Sentence>& corpus, conllu::LanguageTag tag);

} // namespace codemix::strategy
