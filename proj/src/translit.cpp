#include "codemix/translit.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"
#include "codemix/utf8.hpp"

namespace codemix::translit {

namespace {

std::vector<std::string> to_chars(const std::string& word) {
    std::vector<std::string> chars;
    for (std::uint32_t cp : utf8::decode(word)) chars.push_back(utf8::encode_one(cp));
    return chars;
}

} // namespace

Alignment align_pair(const std::string& source, const std::string& target) {
    std::vector<std::string> src = to_chars(source), tgt = to_chars(target);
    std::size_t m = src.size(), n = tgt.size();
    std::vector<std::vector<int>> d(m + 1, std::vector<int>(n + 1, 0));
    for (std::size_t i = 0; i <= m; ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= n; ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            int sub = d[i - 1][j - 1] + (src[i - 1] == tgt[j - 1] ? 0 : 1);
            int ins = d[i][j - 1] + 1;
            int del = d[i - 1][j] + 1;
            d[i][j] = std::min({sub, ins, del});
        }

    Alignment rev;
    std::size_t i = m, j = n;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (src[i - 1] == tgt[j - 1] ? 0 : 1)) {
            rev.push_back({'s', src[i - 1], tgt[j - 1]});
            --i, --j;
        } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
            rev.push_back({'i', "", tgt[j - 1]});
            --j;
        } else {
            rev.push_back({'d', src[i - 1], ""});
            --i;
        }
    }
    return {rev.rbegin(), rev.rend()};
}

std::vector<Alignment> align_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<Alignment> out;
    out.reserve(pairs.size());
    for (const auto& [src, tgt] : pairs) {
        if (src.empty() || tgt.empty())
            throw ValidationError("cannot align pair with an empty side ('" + src + "', '" + tgt + "')");
        out.push_back(align_pair(src, tgt));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> generate_noisy_pairs(
    const std::vector<std::string>& clean_words,
    const std::vector<std::pair<std::string, std::string>>& confusion, std::uint64_t seed,
    const NoiseConfig& config) {
    std::set<std::string> vowels;
    for (const auto& ch : to_chars(config.vowels)) vowels.insert(ch);
    std::map<std::string, std::vector<std::string>> neighbors;
    for (const auto& [from, to] : confusion) neighbors[from].push_back(to);

    Rng rng(seed);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& word : clean_words) {
        std::vector<std::string> chars = to_chars(word);
        std::string noisy;
        for (std::size_t i = 0; i < chars.size(); ++i) {
            if (i > 0 && vowels.count(chars[i])) {
                if (rng.bernoulli(config.p_drop)) continue;
                noisy += chars[i];
                continue;
            }
            auto it = neighbors.find(chars[i]);
            if (it != neighbors.end() && rng.bernoulli(config.p_sub))
                noisy += it->second[rng.index(it->second.size())];
            else
                noisy += chars[i];
        }
        pairs.emplace_back(word, word);
        if (!noisy.empty() && noisy != word) pairs.emplace_back(noisy, word);
    }
    return pairs;
}

double TransducerModel::feature_weight(const std::string& f) const {
    auto it = weights.find(f);
    return it == weights.end() ? 0.0 : it->second;
}

std::vector<std::string> TransducerModel::candidates(const std::string& src_char) const {
    auto it = substitutions.find(src_char);
    if (it == substitutions.end() || it->second.empty()) return {src_char};
    return it->second;
}

namespace {

constexpr const char* kEps = "<eps>";
constexpr const char* kBow = "<w>";
constexpr const char* kEow = "</w>";
constexpr const char* kNoPrev = "<s>";

// Decoder action at one source position: optional insertion, then consume the
// source char by substitution (emitting `emit`) or deletion.
struct Action {
    std::string ins;
    bool del = false;
    std::string emit;

    bool operator==(const Action&) const = default;
};

const std::string& src_at(const std::vector<std::string>& src, int i) {
    static const std::string bow = kBow, eow = kEow;
    if (i < 0) return bow;
    if (i >= static_cast<int>(src.size())) return eow;
    return src[static_cast<std::size_t>(i)];
}

// Features of emitting `emit` via op `op` while positioned at source index i
// (i == src.size() for the final insertion slot). `prev` is the last emitted
// code point so far.
void emission_features(char op, const std::vector<std::string>& src, int i, const std::string& emit,
                       const std::string& prev, std::vector<std::string>& out) {
    const std::string& cur = src_at(src, i);
    std::string o(1, op);
    out.push_back("op:" + o + ":" + cur + ":" + emit);
    out.push_back("big:" + src_at(src, i - 1) + "|" + cur + ":" + emit);
    out.push_back("tri:" + src_at(src, i - 1) + "|" + cur + "|" + src_at(src, i + 1) + ":" + emit);
    out.push_back("prev:" + prev + ":" + emit);
    out.push_back("bias:" + o);
}

std::string last_char(const std::string& s, const std::string& fallback) {
    if (s.empty()) return fallback;
    std::vector<std::string> chars = to_chars(s);
    return chars.back();
}

// Features of a whole action; updates prev to the state after the action.
void action_features(const std::vector<std::string>& src, int i, const Action& a, std::string& prev,
                     std::vector<std::string>& out) {
    if (!a.ins.empty()) {
        emission_features('i', src, i, a.ins, prev, out);
        prev = last_char(a.ins, prev);
    }
    if (a.del) {
        emission_features('d', src, i, kEps, prev, out);
    } else {
        emission_features('s', src, i, a.emit, prev, out);
        prev = last_char(a.emit, prev);
    }
}

double score_features(const std::unordered_map<std::string, double>& w,
                      const std::vector<std::string>& feats) {
    double s = 0.0;
    for (const auto& f : feats) {
        auto it = w.find(f);
        if (it != w.end()) s += it->second;
    }
    return s;
}

struct BeamItem {
    std::string out;
    std::string prev = kNoPrev;
    double score = 0.0;
    std::vector<Action> actions;
    std::string final_ins;
};

void prune(std::vector<BeamItem>& items, int b) {
    std::sort(items.begin(), items.end(), [](const BeamItem& x, const BeamItem& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.out < y.out;
    });
    std::vector<BeamItem> kept;
    for (auto& item : items) {
        bool dup = false;
        for (const auto& k : kept)
            if (k.out == item.out) {
                dup = true;
                break;
            }
        if (!dup) kept.push_back(std::move(item));
        if (static_cast<int>(kept.size()) == b) break;
    }
    items = std::move(kept);
}

std::vector<BeamItem> beam_decode(const TransducerModel& model,
                                  const std::unordered_map<std::string, double>& w,
                                  const std::vector<std::string>& src, int b) {
    if (b < 1) throw ValidationError("beam width must be >= 1");
    std::vector<BeamItem> items = {BeamItem{}};
    std::vector<std::string> feats;
    std::vector<std::string> ins_options = {""};
    ins_options.insert(ins_options.end(), model.insertions.begin(), model.insertions.end());

    for (int i = 0; i < static_cast<int>(src.size()); ++i) {
        std::vector<BeamItem> expanded;
        std::vector<std::string> subs = model.candidates(src[static_cast<std::size_t>(i)]);
        bool can_del = model.deletable.count(src[static_cast<std::size_t>(i)]) != 0;
        for (const auto& item : items) {
            for (const auto& ins : ins_options) {
                for (std::size_t k = 0; k <= subs.size(); ++k) {
                    bool del = k == subs.size();
                    if (del && !can_del) continue;
                    Action a{ins, del, del ? std::string() : subs[k]};
                    feats.clear();
                    std::string prev = item.prev;
                    action_features(src, i, a, prev, feats);
                    BeamItem next = item;
                    next.out += a.ins + a.emit;
                    next.prev = prev;
                    next.score += score_features(w, feats);
                    next.actions.push_back(std::move(a));
                    expanded.push_back(std::move(next));
                }
            }
        }
        prune(expanded, b);
        items = std::move(expanded);
    }

    std::vector<BeamItem> finished = items; // final insertion is optional
    for (const auto& item : items) {
        for (const auto& ins : model.insertions) {
            feats.clear();
            emission_features('i', src, static_cast<int>(src.size()), ins, item.prev, feats);
            BeamItem next = item;
            next.out += ins;
            next.prev = last_char(ins, item.prev);
            next.score += score_features(w, feats);
            next.final_ins = ins;
            finished.push_back(std::move(next));
        }
    }
    prune(finished, b);
    return finished;
}

// Converts a monotone alignment into the decoder's action sequence.
void gold_actions(const Alignment& alignment, std::vector<Action>& actions, std::string& final_ins) {
    actions.clear();
    std::string pending;
    for (const auto& step : alignment) {
        if (step.kind == 'i') {
            pending += step.tgt;
        } else {
            actions.push_back({pending, step.kind == 'd', step.tgt});
            pending.clear();
        }
    }
    final_ins = pending;
}

std::unordered_map<std::string, double> sequence_features(const std::vector<std::string>& src,
                                                          const std::vector<Action>& actions,
                                                          const std::string& final_ins) {
    std::unordered_map<std::string, double> counts;
    std::vector<std::string> feats;
    std::string prev = kNoPrev;
    for (int i = 0; i < static_cast<int>(actions.size()); ++i) {
        feats.clear();
        action_features(src, i, actions[static_cast<std::size_t>(i)], prev, feats);
        for (const auto& f : feats) counts[f] += 1.0;
    }
    if (!final_ins.empty()) {
        feats.clear();
        emission_features('i', src, static_cast<int>(src.size()), final_ins, prev, feats);
        for (const auto& f : feats) counts[f] += 1.0;
    }
    return counts;
}

} // namespace

TransducerModel train_transducer(const std::vector<std::pair<std::string, std::string>>& pairs,
                                 const PerceptronConfig& config,
                                 const TransducerEpochCallback& after_epoch) {
    if (pairs.empty()) throw ValidationError("transducer training needs at least one pair");
    if (config.epochs < 0) throw ValidationError("negative epoch count");
    std::vector<Alignment> alignments = align_pairs(pairs);

    TransducerModel model;
    std::vector<std::vector<std::string>> sources(pairs.size());
    std::vector<std::vector<Action>> gold(pairs.size());
    std::vector<std::string> gold_final(pairs.size());
    std::map<std::string, std::set<std::string>> subs;
    std::set<std::string> inserts;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        sources[p] = to_chars(pairs[p].first);
        gold_actions(alignments[p], gold[p], gold_final[p]);
        for (std::size_t i = 0; i < gold[p].size(); ++i) {
            const Action& a = gold[p][i];
            if (!a.ins.empty()) inserts.insert(a.ins);
            if (a.del) model.deletable.insert(sources[p][i]);
            else subs[sources[p][i]].insert(a.emit);
        }
        if (!gold_final[p].empty()) inserts.insert(gold_final[p]);
    }
    for (const auto& [ch, emits] : subs)
        model.substitutions[ch] = std::vector<std::string>(emits.begin(), emits.end());
    model.insertions.assign(inserts.begin(), inserts.end());

    std::unordered_map<std::string, double> w, u;
    Rng rng(config.seed);
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    double t = 1.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        int updates = 0;
        for (std::size_t p : order) {
            std::vector<BeamItem> best = beam_decode(model, w, sources[p], config.beam);
            const BeamItem& top = best.front();
            if (top.actions == gold[p] && top.final_ins == gold_final[p]) {
                t += 1.0;
                continue;
            }
            auto plus = sequence_features(sources[p], gold[p], gold_final[p]);
            auto minus = sequence_features(sources[p], top.actions, top.final_ins);
            for (const auto& [f, c] : plus) {
                w[f] += c;
                u[f] += t * c;
            }
            for (const auto& [f, c] : minus) {
                w[f] -= c;
                u[f] -= t * c;
            }
            t += 1.0;
            ++updates;
        }
        if (after_epoch) {
            TransducerModel snapshot = model;
            snapshot.weights.clear();
            for (const auto& [f, wt] : w) {
                double avg = wt - (u.count(f) ? u.at(f) : 0.0) / t;
                if (avg != 0.0) snapshot.weights[f] = avg;
            }
            after_epoch(epoch + 1, updates, snapshot);
        }
    }
    for (const auto& [f, acc] : u) w[f] -= acc / t;
    for (const auto& [f, wt] : w)
        if (wt != 0.0) model.weights[f] = wt;
    return model;
}

std::vector<Candidate> kbest_transduce(const TransducerModel& model, const std::string& word, int b) {
    std::vector<BeamItem> items = beam_decode(model, model.weights, to_chars(word), b);
    std::vector<Candidate> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back({item.out, item.score});
    return out;
}

void save_transducer(const TransducerModel& model, std::ostream& out) {
    nlohmann::json j;
    j["format"] = "codemix-translit";
    j["version"] = 1;
    j["weights"] = model.weights;
    j["substitutions"] = model.substitutions;
    j["deletable"] = std::vector<std::string>(model.deletable.begin(), model.deletable.end());
    j["insertions"] = model.insertions;
    out << j.dump(1) << "\n";
    if (!out) throw ModelError("failed to write transducer model");
}

TransducerModel load_transducer(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("bad transducer model: ") + e.what());
    }
    if (j.value("format", "") != "codemix-translit")
        throw ModelError("bad transducer model: expected format 'codemix-translit'");
    if (j.value("version", 0) != 1)
        throw ModelError("unsupported transducer model version");
    TransducerModel model;
    model.weights = j.at("weights").get<std::unordered_map<std::string, double>>();
    model.substitutions =
        j.at("substitutions").get<std::unordered_map<std::string, std::vector<std::string>>>();
    for (const auto& ch : j.at("deletable")) model.deletable.insert(ch.get<std::string>());
    model.insertions = j.at("insertions").get<std::vector<std::string>>();
    return model;
}

void save_transducer_file(const TransducerModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    save_transducer(model, out);
}

TransducerModel load_transducer_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_transducer(in);
}

} // namespace codemix::translit
