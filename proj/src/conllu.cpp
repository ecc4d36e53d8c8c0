#include "codemix/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "codemix/error.hpp"

namespace codemix::conllu {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

bool parse_int(std::string_view s, int& value) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc() && p == s.data() + s.size();
}

std::string describe(const Sentence& s, std::size_t ordinal) {
    if (!s.sent_id.empty()) return "sentence '" + s.sent_id + "'";
    return "sentence #" + std::to_string(ordinal + 1);
}

} // namespace

const char* to_string(LanguageTag tag) {
    switch (tag) {
    case LanguageTag::hi: return "hi";
    case LanguageTag::en: return "en";
    case LanguageTag::acro: return "acro";
    case LanguageTag::ne: return "ne";
    case LanguageTag::univ: return "univ";
    }
    return "?";
}

std::optional<LanguageTag> parse_language_tag(std::string_view s) {
    if (s == "hi") return LanguageTag::hi;
    if (s == "en") return LanguageTag::en;
    if (s == "acro") return LanguageTag::acro;
    if (s == "ne") return LanguageTag::ne;
    if (s == "univ") return LanguageTag::univ;
    return std::nullopt;
}

const std::vector<std::string>& language_tag_names() {
    static const std::vector<std::string> names = {"hi", "en", "acro", "ne", "univ"};
    return names;
}

bool AnnotatedToken::misc_flag(std::string_view key, std::string_view value) const {
    for (const auto& [k, v] : misc)
        if (k == key && v == value) return true;
    return false;
}

void validate_heads(const Sentence& s) {
    const int n = s.size();
    for (const auto& tok : s.tokens) {
        if (!tok.head) continue;
        if (*tok.head < 0 || *tok.head > n)
            throw ValidationError("head " + std::to_string(*tok.head) + " of token " +
                                  std::to_string(tok.index) + " out of range [0," +
                                  std::to_string(n) + "]");
        if (*tok.head == tok.index)
            throw ValidationError("token " + std::to_string(tok.index) + " is its own head");
    }
    // Cycle check over the set heads: follow parent pointers with marks.
    std::vector<int> state(n + 1, 0); // 0 unvisited, 1 on path, 2 done
    for (int start = 1; start <= n; ++start) {
        int v = start;
        std::vector<int> path;
        while (v != 0 && state[v] == 0) {
            state[v] = 1;
            path.push_back(v);
            const auto& h = s.tokens[static_cast<std::size_t>(v - 1)].head;
            if (!h) break;
            v = *h;
            if (v != 0 && state[v] == 1)
                throw ValidationError("cyclic heads involving token " + std::to_string(v));
        }
        for (int u : path) state[u] = 2;
    }
    bool all_set = std::all_of(s.tokens.begin(), s.tokens.end(),
                               [](const AnnotatedToken& t) { return t.head.has_value(); });
    if (all_set && !is_well_formed_tree(s))
        throw ValidationError("heads do not form a tree rooted at 0");
}

bool is_well_formed_tree(const Sentence& s) {
    const int n = s.size();
    if (n == 0) return false;
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n) + 1);
    for (const auto& tok : s.tokens) {
        if (!tok.head || *tok.head < 0 || *tok.head > n || *tok.head == tok.index) return false;
        children[static_cast<std::size_t>(*tok.head)].push_back(tok.index);
    }
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    std::vector<int> stack = {0};
    seen[0] = true;
    int reached = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int c : children[static_cast<std::size_t>(v)]) {
            if (seen[static_cast<std::size_t>(c)]) return false;
            seen[static_cast<std::size_t>(c)] = true;
            ++reached;
            stack.push_back(c);
        }
    }
    return reached == n;
}

bool is_projective(const Sentence& s) {
    if (!is_well_formed_tree(s)) return false;
    const int n = s.size();
    std::vector<std::pair<int, int>> spans;
    spans.reserve(static_cast<std::size_t>(n));
    for (const auto& tok : s.tokens)
        spans.emplace_back(std::min(*tok.head, tok.index), std::max(*tok.head, tok.index));
    for (std::size_t a = 0; a < spans.size(); ++a)
        for (std::size_t b = a + 1; b < spans.size(); ++b) {
            auto [l1, r1] = spans[a];
            auto [l2, r2] = spans[b];
            if ((l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1)) return false;
        }
    return true;
}

namespace {

void finish_sentence(Sentence& sent, std::vector<Sentence>& out, std::size_t line_no) {
    if (sent.tokens.empty() && sent.sent_id.empty() && sent.raw_text.empty()) return;
    if (sent.tokens.empty())
        throw ParseError("line " + std::to_string(line_no) + ": sentence without token lines");
    try {
        validate_heads(sent);
    } catch (const ValidationError& e) {
        throw ValidationError(describe(sent, out.size()) + ": " + e.what());
    }
    out.push_back(std::move(sent));
    sent = Sentence{};
}

} // namespace

std::vector<Sentence> read_conllu(std::istream& in) {
    std::vector<Sentence> out;
    Sentence sent;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            finish_sentence(sent, out, line_no);
            continue;
        }
        if (line[0] == '#') {
            std::string_view body(line);
            body.remove_prefix(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            if (body.rfind("sent_id = ", 0) == 0) sent.sent_id = std::string(body.substr(10));
            else if (body.rfind("text = ", 0) == 0) sent.raw_text = std::string(body.substr(7));
            continue;
        }
        auto cols = split(line, '\t');
        if (cols.size() != 10)
            throw ParseError("line " + std::to_string(line_no) + ": expected 10 tab-separated columns, got " +
                             std::to_string(cols.size()));
        std::string_view id = cols[0];
        if (id.find('-') != std::string_view::npos)
            throw ParseError("line " + std::to_string(line_no) + ": multiword token ranges are not supported");
        if (id.find('.') != std::string_view::npos)
            throw ParseError("line " + std::to_string(line_no) + ": empty nodes are not supported");
        AnnotatedToken tok;
        if (!parse_int(id, tok.index) || tok.index < 1)
            throw ParseError("line " + std::to_string(line_no) + ": bad token id '" + std::string(id) + "'");
        if (tok.index != static_cast<int>(sent.tokens.size()) + 1)
            throw ParseError("line " + std::to_string(line_no) + ": token id " + std::to_string(tok.index) +
                             " out of sequence");
        tok.form = std::string(cols[1]);
        tok.norm = tok.form;
        if (cols[2] != "_") tok.lemma = std::string(cols[2]);
        if (cols[3] != "_") tok.upos = std::string(cols[3]);
        // cols[4] XPOS, cols[5] FEATS, cols[8] DEPS: not modeled, ignored.
        if (cols[6] != "_") {
            int head = 0;
            if (!parse_int(cols[6], head))
                throw ParseError("line " + std::to_string(line_no) + ": bad head '" + std::string(cols[6]) + "'");
            tok.head = head;
        }
        if (cols[7] != "_") tok.deprel = std::string(cols[7]);
        if (cols[9] != "_") {
            for (auto item : split(cols[9], '|')) {
                auto eq = item.find('=');
                std::string key(eq == std::string_view::npos ? item : item.substr(0, eq));
                std::string val(eq == std::string_view::npos ? std::string_view{} : item.substr(eq + 1));
                if (key == "Lang") {
                    auto tag = parse_language_tag(val);
                    if (!tag)
                        throw ValidationError("line " + std::to_string(line_no) + ": unknown language tag '" +
                                              val + "'");
                    tok.lang = *tag;
                } else if (key == "Norm") {
                    tok.norm = val;
                } else {
                    tok.misc.emplace_back(std::move(key), std::move(val));
                }
            }
        }
        sent.tokens.push_back(std::move(tok));
    }
    finish_sentence(sent, out, line_no + 1);
    return out;
}

std::vector<Sentence> read_conllu_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_conllu(in);
}

namespace {

std::string or_underscore(const std::string& s) { return s.empty() ? "_" : s; }

} // namespace

void write_conllu(const std::vector<Sentence>& sentences, std::ostream& out) {
    for (const auto& sent : sentences) {
        if (!sent.sent_id.empty()) out << "# sent_id = " << sent.sent_id << "\n";
        if (!sent.raw_text.empty()) out << "# text = " << sent.raw_text << "\n";
        for (const auto& tok : sent.tokens) {
            out << tok.index << '\t' << tok.form << '\t' << or_underscore(tok.lemma) << '\t'
                << or_underscore(tok.upos) << '\t' << '_' << '\t' << '_' << '\t';
            if (tok.head) out << *tok.head;
            else out << '_';
            out << '\t' << or_underscore(tok.deprel) << '\t' << '_' << '\t';
            std::string misc;
            if (tok.lang) misc += std::string("Lang=") + to_string(*tok.lang);
            if (!tok.norm.empty() && tok.norm != tok.form) {
                if (!misc.empty()) misc += '|';
                misc += "Norm=" + tok.norm;
            }
            for (const auto& [k, v] : tok.misc) {
                if (!misc.empty()) misc += '|';
                misc += k;
                if (!v.empty()) misc += "=" + v;
            }
            out << or_underscore(misc) << "\n";
        }
        out << "\n";
    }
}

std::string write_conllu_string(const std::vector<Sentence>& sentences) {
    std::ostringstream os;
    write_conllu(sentences, os);
    return os.str();
}

void write_conllu_file(const std::vector<Sentence>& sentences, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    write_conllu(sentences, out);
}

double mixing_ratio(const std::vector<Sentence>& corpus) {
    if (corpus.empty()) throw ValidationError("mixing ratio of an empty corpus is undefined");
    double sum = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& sent = corpus[i];
        int hindi = 0, english = 0;
        for (const auto& tok : sent.tokens) {
            if (!tok.lang || tok.misc_flag("Borrowed", "Yes")) continue;
            if (*tok.lang == LanguageTag::hi) ++hindi;
            else if (*tok.lang == LanguageTag::en) ++english;
        }
        if (hindi + english == 0)
            throw ValidationError(describe(sent, i) + " has no Hindi or English tokens");
        sum += static_cast<double>(hindi) / static_cast<double>(hindi + english);
    }
    return sum / static_cast<double>(corpus.size());
}

CorpusStats corpus_stats(const std::vector<Sentence>& corpus) {
    CorpusStats st;
    st.sentences = corpus.size();
    for (const auto& sent : corpus) {
        st.tokens += sent.tokens.size();
        for (const auto& tok : sent.tokens) {
            if (tok.lang) ++st.per_tag[static_cast<int>(*tok.lang)];
            else ++st.untagged;
        }
    }
    try {
        st.mixing_ratio = mixing_ratio(corpus);
        st.mixing_ratio_defined = true;
    } catch (const Error&) {
        st.mixing_ratio_defined = false;
    }
    return st;
}

} // namespace codemix::conllu
