#include "codemix/kneser_ney.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "codemix/error.hpp"

namespace codemix::kn {

namespace {

constexpr double kLogFloor = -227.955924206411; // ln(1e-99), ARPA's -99 in log10

// Modified Kneser-Ney discounts for counts 1, 2 and 3+, derived from the
// counts-of-counts of one order. Floored at a small positive value so every
// context keeps some backoff mass even on degenerate fixture corpora.
struct Discounts {
    double d1 = 0.5, d2 = 1.0, d3 = 1.5;

    double of(long long c) const { return c >= 3 ? d3 : (c == 2 ? d2 : (c == 1 ? d1 : 0.0)); }
};

Discounts estimate_discounts(const std::map<std::string, long long>& counts) {
    long long n[5] = {0, 0, 0, 0, 0};
    for (const auto& [key, c] : counts)
        if (c >= 1 && c <= 4) ++n[c];
    Discounts d;
    if (n[1] > 0 && n[2] > 0) {
        double y = static_cast<double>(n[1]) / (n[1] + 2.0 * n[2]);
        d.d1 = 1.0 - 2.0 * y * n[2] / n[1];
        if (n[3] > 0) d.d2 = 2.0 - 3.0 * y * n[3] / n[2];
        if (n[3] > 0 && n[4] > 0) d.d3 = 3.0 - 4.0 * y * n[4] / n[3];
    }
    constexpr double kMin = 1e-3;
    d.d1 = std::clamp(d.d1, kMin, 1.0);
    d.d2 = std::clamp(d.d2, kMin, 2.0);
    d.d3 = std::clamp(d.d3, kMin, 3.0);
    return d;
}

std::string join2(const std::string& a, const std::string& b) { return a + " " + b; }
std::string join3(const std::string& a, const std::string& b, const std::string& c) {
    return a + " " + b + " " + c;
}

} // namespace

TrigramLM TrigramLM::train(const std::vector<std::vector<std::string>>& corpus) {
    if (corpus.empty()) throw ValidationError("language model corpus is empty");

    std::map<std::string, long long> raw;
    for (const auto& sent : corpus)
        for (const auto& tok : sent) {
            if (tok == kBos || tok == kEos)
                throw ValidationError("corpus contains the reserved token '" + tok + "'");
            ++raw[tok];
        }
    auto mapped = [&raw](const std::string& tok) -> std::string {
        auto it = raw.find(tok);
        return (it == raw.end() || it->second <= 1) ? kUnk : tok;
    };

    // Raw n-gram counts over sentences padded with one <s> and one </s>.
    std::map<std::string, long long> c3, c2;
    std::map<std::string, long long> c1; // predicted tokens only
    for (const auto& sent : corpus) {
        std::vector<std::string> seq = {kBos};
        for (const auto& tok : sent) seq.push_back(mapped(tok));
        seq.push_back(kEos);
        for (std::size_t i = 1; i < seq.size(); ++i) {
            ++c1[seq[i]];
            ++c2[join2(seq[i - 1], seq[i])];
            if (i >= 2) ++c3[join3(seq[i - 2], seq[i - 1], seq[i])];
        }
    }

    TrigramLM lm;
    lm.vocab_.insert(kBos);
    lm.vocab_.insert(kUnk);
    std::set<std::string> predictable = {kUnk};
    for (const auto& [w, c] : c1) {
        lm.vocab_.insert(w);
        predictable.insert(w);
    }
    lm.predictable_.assign(predictable.begin(), predictable.end());
    const double uniform = 1.0 / static_cast<double>(lm.predictable_.size());

    // Lower-order counts are continuation counts, except after <s>, which
    // never occurs as a predicted word, so its bigrams keep raw counts.
    std::map<std::string, long long> b2, b1;
    for (const auto& [key, c] : c3) {
        std::size_t cut = key.find(' ');
        ++b2[key.substr(cut + 1)];
    }
    for (const auto& [key, c] : c2) {
        std::size_t cut = key.find(' ');
        if (key.compare(0, cut, kBos) == 0) b2[key] = c;
        ++b1[key.substr(cut + 1)];
    }

    Discounts d3 = estimate_discounts(c3), d2 = estimate_discounts(b2), d1 = estimate_discounts(b1);

    // Unigrams: interpolate continuation probability with the uniform base.
    long long total1 = 0;
    for (const auto& [w, c] : b1) total1 += c;
    double held1 = 0.0;
    for (const auto& [w, c] : b1) held1 += d1.of(c);
    double gamma1 = held1 / total1;
    for (const auto& w : lm.predictable_) {
        auto it = b1.find(w);
        long long c = it == b1.end() ? 0 : it->second;
        double p = (c - d1.of(c) > 0 ? (c - d1.of(c)) / total1 : 0.0) + gamma1 * uniform;
        lm.unigram_logp_[w] = std::log(p);
    }

    // Bigrams: per-context totals and held-out mass.
    std::map<std::string, long long> total2;
    std::map<std::string, double> held2;
    for (const auto& [key, c] : b2) {
        std::string v = key.substr(0, key.find(' '));
        total2[v] += c;
        held2[v] += d2.of(c);
    }
    for (const auto& [v, t] : total2) lm.unigram_backoff_[v] = std::log(held2[v] / t);
    for (const auto& [key, c] : b2) {
        std::size_t cut = key.find(' ');
        std::string v = key.substr(0, cut), w = key.substr(cut + 1);
        double p = std::max(0.0, c - d2.of(c)) / total2[v] +
                   (held2[v] / total2[v]) * std::exp(lm.unigram_logp_.at(w));
        lm.bigram_logp_[key] = std::log(p);
    }

    // Trigrams.
    std::map<std::string, long long> total3;
    std::map<std::string, double> held3;
    for (const auto& [key, c] : c3) {
        std::string uv = key.substr(0, key.rfind(' '));
        total3[uv] += c;
        held3[uv] += d3.of(c);
    }
    for (const auto& [uv, t] : total3) lm.bigram_backoff_[uv] = std::log(held3[uv] / t);
    for (const auto& [key, c] : c3) {
        std::size_t cut = key.rfind(' ');
        std::string uv = key.substr(0, cut), w = key.substr(cut + 1);
        std::string v = uv.substr(uv.find(' ') + 1);
        double p = std::max(0.0, c - d3.of(c)) / total3[uv] +
                   (held3[uv] / total3[uv]) * std::exp(lm.bigram_log_prob(v, w));
        lm.trigram_logp_[key] = std::log(p);
    }
    return lm;
}

std::string TrigramLM::map_word(const std::string& w) const { return in_vocab(w) ? w : kUnk; }

double TrigramLM::bigram_log_prob(const std::string& v, const std::string& w) const {
    auto it = bigram_logp_.find(join2(v, w));
    if (it != bigram_logp_.end()) return it->second;
    auto bo = unigram_backoff_.find(v);
    double backoff = bo == unigram_backoff_.end() ? 0.0 : bo->second;
    return backoff + unigram_logp_.at(w);
}

double TrigramLM::log_prob(const std::vector<std::string>& history, const std::string& word) const {
    std::string w = map_word(word);
    if (w == kBos) return kLogFloor;
    if (history.empty()) return unigram_logp_.at(w);
    std::string v = map_word(history.back());
    if (history.size() == 1) return bigram_log_prob(v, w);
    std::string u = map_word(history[history.size() - 2]);
    auto it = trigram_logp_.find(join3(u, v, w));
    if (it != trigram_logp_.end()) return it->second;
    auto bo = bigram_backoff_.find(join2(u, v));
    double backoff = bo == bigram_backoff_.end() ? 0.0 : bo->second;
    return backoff + bigram_log_prob(v, w);
}

namespace {

constexpr double kLn10 = 2.302585092994046;

void write_entry(std::ostream& out, double logp_ln, const std::string& gram, const double* backoff_ln) {
    out << logp_ln / kLn10 << '\t' << gram;
    if (backoff_ln) out << '\t' << *backoff_ln / kLn10;
    out << '\n';
}

} // namespace

void TrigramLM::save_arpa(std::ostream& out) const {
    out.precision(17);
    std::map<std::string, double> uni, bi, tri; // sorted for a stable file
    for (const auto& [k, v] : unigram_logp_) uni[k] = v;
    uni[kBos] = kLogFloor;
    for (const auto& [k, v] : bigram_logp_) bi[k] = v;
    for (const auto& [k, v] : trigram_logp_) tri[k] = v;

    out << "\\data\\\n";
    out << "ngram 1=" << uni.size() << "\n";
    out << "ngram 2=" << bi.size() << "\n";
    out << "ngram 3=" << tri.size() << "\n\n";

    out << "\\1-grams:\n";
    for (const auto& [w, logp] : uni) {
        auto bo = unigram_backoff_.find(w);
        write_entry(out, logp, w, bo == unigram_backoff_.end() ? nullptr : &bo->second);
    }
    out << "\n\\2-grams:\n";
    for (const auto& [k, logp] : bi) {
        auto bo = bigram_backoff_.find(k);
        write_entry(out, logp, k, bo == bigram_backoff_.end() ? nullptr : &bo->second);
    }
    out << "\n\\3-grams:\n";
    for (const auto& [k, logp] : tri) write_entry(out, logp, k, nullptr);
    out << "\n\\end\\\n";
    if (!out) throw ModelError("failed to write ARPA model");
}

TrigramLM TrigramLM::load_arpa(std::istream& in) {
    TrigramLM lm;
    std::string line;
    int order = 0;
    bool saw_data = false, saw_end = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "\\data\\") {
            saw_data = true;
            continue;
        }
        if (line == "\\end\\") {
            saw_end = true;
            break;
        }
        if (line.rfind("ngram ", 0) == 0) continue;
        if (line.size() > 2 && line[0] == '\\' && line.find("-grams:") != std::string::npos) {
            order = line[1] - '0';
            if (order < 1 || order > 3) throw ModelError("unsupported ARPA order in '" + line + "'");
            continue;
        }
        if (order == 0) throw ModelError("ARPA entry before any \\N-grams: header");

        std::istringstream ss(line);
        double logp10;
        if (!(ss >> logp10)) throw ModelError("bad ARPA line '" + line + "'");
        std::vector<std::string> toks;
        std::string tok;
        while (ss >> tok) toks.push_back(tok);
        bool has_backoff = static_cast<int>(toks.size()) == order + 1;
        if (static_cast<int>(toks.size()) != order && !has_backoff)
            throw ModelError("ARPA line has wrong arity: '" + line + "'");
        double backoff_ln = 0.0;
        if (has_backoff) {
            backoff_ln = std::stod(toks.back()) * kLn10;
            toks.pop_back();
        }
        std::string gram = toks[0];
        for (std::size_t i = 1; i < toks.size(); ++i) gram += " " + toks[i];
        double logp_ln = logp10 * kLn10;
        if (order == 1) {
            if (gram != kBos) lm.unigram_logp_[gram] = logp_ln;
            if (has_backoff) lm.unigram_backoff_[gram] = backoff_ln;
            lm.vocab_.insert(gram);
        } else if (order == 2) {
            lm.bigram_logp_[gram] = logp_ln;
            if (has_backoff) lm.bigram_backoff_[gram] = backoff_ln;
        } else {
            lm.trigram_logp_[gram] = logp_ln;
        }
    }
    if (!saw_data || !saw_end) throw ModelError("truncated ARPA file");
    if (!lm.vocab_.count(kUnk)) throw ModelError("ARPA model lacks " + std::string(kUnk));
    std::set<std::string> predictable;
    for (const auto& w : lm.vocab_)
        if (w != kBos) predictable.insert(w);
    lm.predictable_.assign(predictable.begin(), predictable.end());
    return lm;
}

void TrigramLM::save_arpa_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    save_arpa(out);
}

TrigramLM TrigramLM::load_arpa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_arpa(in);
}

} // namespace codemix::kn
