#include "codemix/fragments.hpp"

#include "codemix/error.hpp"

namespace codemix::strategy {

FragmentSegmentation segment_fragments(const conllu::Sentence& sentence) {
    int n = sentence.size();
    if (n == 0) throw ValidationError("cannot segment an empty sentence");

    int hi_count = 0, en_count = 0;
    std::vector<int> resolved(n + 1, -1); // 0 = hi, 1 = en
    for (int i = 1; i <= n; ++i) {
        auto lang = sentence.tokens[i - 1].lang;
        if (!lang)
            throw ValidationError("sentence '" + sentence.sent_id + "': token " + std::to_string(i) +
                                  " has no language tag");
        if (*lang == conllu::LanguageTag::hi) {
            resolved[i] = 0;
            ++hi_count;
        } else if (*lang == conllu::LanguageTag::en) {
            resolved[i] = 1;
            ++en_count;
        }
    }
    if (hi_count + en_count == 0)
        throw ValidationError("sentence '" + sentence.sent_id + "' has no hi/en token to segment");

    for (int i = 2; i <= n; ++i) // univ/ne/acro join the preceding fragment
        if (resolved[i] < 0) resolved[i] = resolved[i - 1];
    for (int i = n - 1; i >= 1; --i) // sentence-initial run joins the following one
        if (resolved[i] < 0) resolved[i] = resolved[i + 1];

    FragmentSegmentation seg;
    seg.fragment_of.assign(n + 1, -1);
    for (int i = 1; i <= n; ++i) {
        auto lang = resolved[i] == 0 ? conllu::LanguageTag::hi : conllu::LanguageTag::en;
        if (seg.fragments.empty() || seg.fragments.back().lang != lang)
            seg.fragments.push_back({i, i, lang});
        else
            seg.fragments.back().end = i;
        seg.fragment_of[i] = static_cast<int>(seg.fragments.size()) - 1;
    }
    seg.matrix_language = en_count > hi_count ? conllu::LanguageTag::en : conllu::LanguageTag::hi;
    return seg;
}

conllu::Sentence resolve_languages(const conllu::Sentence& sentence,
                                   const FragmentSegmentation& seg) {
    conllu::Sentence out = sentence;
    for (int i = 1; i <= out.size(); ++i) out.tokens[i - 1].lang = seg.token_language(i);
    return out;
}

void stamp_language(std::vector<conllu::Sentence>& corpus, conllu::LanguageTag tag) {
    for (auto& s : corpus)
        for (auto& tok : s.tokens)
            if (!tok.lang) tok.lang = tag;
}

} // namespace codemix::strategy
