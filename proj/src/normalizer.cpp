#include "codemix/normalizer.hpp"

#include "codemix/error.hpp"

namespace codemix::norm {

CandidateLattice build_lattice(const translit::TransducerModel& model,
                               const std::vector<std::string>& words, int beam) {
    CandidateLattice lattice;
    lattice.reserve(words.size());
    for (const auto& w : words) lattice.push_back(translit::kbest_transduce(model, w, beam));
    return lattice;
}

namespace {

struct Path {
    double score = 0.0;
    std::vector<int> ranks;
    bool alive = false;
};

// Higher score wins; equal scores prefer the lexicographically smaller rank
// vector (i.e. earlier tokens stick to better transducer candidates).
bool better(const Path& a, const Path& b) {
    if (!b.alive) return true;
    if (a.score != b.score) return a.score > b.score;
    return a.ranks < b.ranks;
}

} // namespace

std::vector<int> decode_sentence(const CandidateLattice& lattice, const kn::TrigramLM& lm) {
    int n = static_cast<int>(lattice.size());
    for (int i = 0; i < n; ++i)
        if (lattice[i].empty())
            throw ValidationError("token " + std::to_string(i + 1) + " has no candidates");
    if (n == 0) return {};

    const std::vector<std::string> bos_hist = {kn::kBos};
    if (n == 1) {
        Path best;
        for (int k = 0; k < static_cast<int>(lattice[0].size()); ++k) {
            Path p{lm.log_prob(bos_hist, lattice[0][k].word), {k}, true};
            if (better(p, best)) best = p;
        }
        return best.ranks;
    }

    auto cands = [&lattice](int i) { return static_cast<int>(lattice[i].size()); };
    // state (j, k): candidate j at position i-1, candidate k at position i
    std::vector<std::vector<Path>> cur(cands(0), std::vector<Path>(cands(1)));
    for (int j = 0; j < cands(0); ++j) {
        double first = lm.log_prob(bos_hist, lattice[0][j].word);
        for (int k = 0; k < cands(1); ++k) {
            cur[j][k].score =
                first + lm.log_prob({kn::kBos, lattice[0][j].word}, lattice[1][k].word);
            cur[j][k].ranks = {j, k};
            cur[j][k].alive = true;
        }
    }

    for (int i = 2; i < n; ++i) {
        std::vector<std::vector<Path>> next(cands(i - 1), std::vector<Path>(cands(i)));
        for (int j = 0; j < cands(i - 2); ++j)
            for (int k = 0; k < cands(i - 1); ++k) {
                const Path& base = cur[j][k];
                for (int l = 0; l < cands(i); ++l) {
                    double s = base.score + lm.log_prob({lattice[i - 2][j].word, lattice[i - 1][k].word},
                                                        lattice[i][l].word);
                    Path& slot = next[k][l];
                    Path p{s, base.ranks, true};
                    p.ranks.push_back(l);
                    if (better(p, slot)) slot = std::move(p);
                }
            }
        cur = std::move(next);
    }

    Path best;
    for (const auto& row : cur)
        for (const auto& p : row)
            if (better(p, best)) best = p;
    return best.ranks;
}

std::vector<std::string> decode_words(const CandidateLattice& lattice, const kn::TrigramLM& lm) {
    std::vector<int> ranks = decode_sentence(lattice, lm);
    std::vector<std::string> words(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) words[i] = lattice[i][ranks[i]].word;
    return words;
}

void Normalizer::normalize(conllu::Sentence& sentence) const {
    auto run_language = [](const conllu::AnnotatedToken& tok) -> int {
        if (tok.lang == conllu::LanguageTag::hi) return 0;
        if (tok.lang == conllu::LanguageTag::en) return 1;
        return -1; // ne/acro/univ and untagged tokens pass through
    };

    int n = sentence.size();
    for (int start = 0; start < n;) {
        int lang = run_language(sentence.tokens[start]);
        int end = start;
        while (end + 1 < n && run_language(sentence.tokens[end + 1]) == lang) ++end;
        if (lang >= 0) {
            std::vector<std::string> words;
            for (int i = start; i <= end; ++i) words.push_back(sentence.tokens[i].form);
            const auto& transducer = lang == 0 ? hi_transducer : en_transducer;
            const auto& lm = lang == 0 ? hi_lm : en_lm;
            std::vector<std::string> out = decode_words(build_lattice(transducer, words, beam), lm);
            for (int i = start; i <= end; ++i) sentence.tokens[i].norm = out[i - start];
        }
        start = end + 1;
    }
}

} // namespace codemix::norm
