#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace codemix::conllu {

// Closed five-tag set used for token-level language identification.
enum class LanguageTag { hi, en, acro, ne, univ };

constexpr int kNumLanguageTags = 5;

const char* to_string(LanguageTag tag);
std::optional<LanguageTag> parse_language_tag(std::string_view s);

// Ordered as the LID classifier's label inventory (also its tie-break order).
const std::vector<std::string>& language_tag_names();

struct AnnotatedToken {
    int index = 0;            // 1-based position
    std::string form;         // surface string
    std::string norm;         // normalized / back-transliterated form (defaults to form)
    std::string lemma;        // empty = unset
    std::string upos;         // empty = unset
    std::optional<LanguageTag> lang;
    std::optional<int> head;  // 0 = artificial ROOT
    std::string deprel;       // empty = unset
    std::vector<std::pair<std::string, std::string>> misc; // other MISC pairs, order kept

    bool misc_flag(std::string_view key, std::string_view value) const;
    const std::string& effective_form() const { return norm.empty() ? form : norm; }

    bool operator==(const AnnotatedToken&) const = default;
};

struct Sentence {
    std::string sent_id;
    std::string raw_text;
    std::vector<AnnotatedToken> tokens;

    int size() const { return static_cast<int>(tokens.size()); }
    bool operator==(const Sentence&) const = default;
};

// Throws ValidationError unless heads (where set) are in range, acyclic, and,
// when fully specified, every token is reachable from ROOT.
void validate_heads(const Sentence& s);

// True iff all heads are set and they form a tree rooted at node 0.
bool is_well_formed_tree(const Sentence& s);

// True iff is_well_formed_tree and no two arcs cross.
bool is_projective(const Sentence& s);

std::vector<Sentence> read_conllu(std::istream& in);
std::vector<Sentence> read_conllu_file(const std::string& path);

void write_conllu(const std::vector<Sentence>& sentences, std::ostream& out);
std::string write_conllu_string(const std::vector<Sentence>& sentences);
void write_conllu_file(const std::vector<Sentence>& sentences, const std::string& path);

// Mean per-sentence share of Hindi tokens among Hindi+English tokens.
// Tokens tagged acro/ne/univ and tokens flagged Borrowed=Yes are excluded
// from both counts. A sentence with no countable token is an error.
double mixing_ratio(const std::vector<Sentence>& corpus);

struct CorpusStats {
    std::size_t sentences = 0;
    std::size_t tokens = 0;
    std::size_t per_tag[kNumLanguageTags] = {0, 0, 0, 0, 0};
    std::size_t untagged = 0;
    double mixing_ratio = 0.0;
    bool mixing_ratio_defined = false;
};

CorpusStats corpus_stats(const std::vector<Sentence>& corpus);

} // namespace codemix::conllu
