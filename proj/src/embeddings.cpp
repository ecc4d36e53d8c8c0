#include "codemix/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::emb {

const Eigen::VectorXd& EmbeddingTable::lookup(const std::string& word) const {
    auto it = entries.find(word);
    return it == entries.end() ? oov_vector : it->second;
}

Eigen::VectorXd random_embedding(std::uint64_t seed, int dimension) {
    if (dimension < 1) throw ValidationError("embedding dimension must be >= 1");
    Rng rng(seed);
    Eigen::VectorXd v(dimension);
    for (int i = 0; i < dimension; ++i) v[i] = rng.uniform(-0.25, 0.25);
    return v;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(std::move(tok));
    return out;
}

bool is_uint(const std::string& s) {
    if (s.empty()) return false;
    unsigned long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

} // namespace

EmbeddingTable load_embeddings(std::istream& in, std::optional<int> expected_dim) {
    EmbeddingTable table;
    table.dimension = expected_dim.value_or(0);
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        auto parts = split_ws(line);
        if (parts.empty()) continue;
        if (first_content_line && parts.size() == 2 && is_uint(parts[0]) && is_uint(parts[1])) {
            int dim = std::stoi(parts[1]);
            if (table.dimension > 0 && table.dimension != dim)
                throw ParseError("line " + std::to_string(line_no) + ": header dimension " +
                                 std::to_string(dim) + " != expected " + std::to_string(table.dimension));
            table.dimension = dim;
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        int dim = static_cast<int>(parts.size()) - 1;
        if (table.dimension == 0) table.dimension = dim;
        if (dim != table.dimension)
            throw ParseError("line " + std::to_string(line_no) + ": row has " + std::to_string(dim) +
                             " values, expected " + std::to_string(table.dimension));
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) {
            try {
                v[i] = std::stod(parts[static_cast<std::size_t>(i) + 1]);
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(line_no) + ": bad float '" +
                                 parts[static_cast<std::size_t>(i) + 1] + "'");
            }
        }
        table.entries[parts[0]] = std::move(v);
    }
    if (table.dimension == 0) throw ParseError("embedding file has no rows and no dimension");
    auto unk = table.entries.find(kUnknown);
    table.oov_vector = unk != table.entries.end() ? unk->second : random_embedding(kOovSeed, table.dimension);
    return table;
}

EmbeddingTable load_embeddings_file(const std::string& path, std::optional<int> expected_dim) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_embeddings(in, expected_dim);
}

BilingualLexicon load_lexicon(std::istream& in) {
    BilingualLexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected two tab-separated columns");
        lex.pairs[line.substr(0, tab)].push_back(line.substr(tab + 1));
    }
    return lex;
}

BilingualLexicon load_lexicon_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_lexicon(in);
}

EmbeddingTable project_lexicon(const EmbeddingTable& source, const BilingualLexicon& lexicon) {
    EmbeddingTable out;
    out.dimension = source.dimension;
    out.oov_vector = source.oov_vector;
    for (const auto& [word, translations] : lexicon.pairs) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(source.dimension);
        int found = 0;
        for (const auto& t : translations) {
            auto it = source.entries.find(t);
            if (it == source.entries.end()) continue;
            sum += it->second;
            ++found;
        }
        if (found > 0) out.entries[word] = sum / found;
    }
    if (out.entries.empty())
        throw ValidationError("lexicon projection produced an empty table: no translation is in the source vocabulary");
    return out;
}

Eigen::Vector2d language_tag_vector(conllu::LanguageTag lang) {
    switch (lang) {
    case conllu::LanguageTag::hi: return {-0.25, 0.25};
    case conllu::LanguageTag::en: return {0.25, -0.25};
    default:
        throw ValidationError(std::string("no language vector for tag '") + conllu::to_string(lang) +
                              "'; resolve it through its fragment first");
    }
}

} // namespace codemix::emb
