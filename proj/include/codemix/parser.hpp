#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "codemix/conllu.hpp"
#include "codemix/nn.hpp"

namespace codemix::parser {

enum class TransitionKind { Shift, LeftArc, RightArc, Reduce };

struct Transition {
    TransitionKind kind = TransitionKind::Shift;
    std::string label; // LeftArc/RightArc only

    bool operator==(const Transition& o) const { return kind == o.kind && label == o.label; }
};

// "shift" | "reduce" | "left_arc:nsubj" | "right_arc:obj"
std::string transition_name(const Transition& t);
Transition parse_transition(const std::string& name);

struct Arc {
    int head = 0;
    int dependent = 0;
    std::string label;
};

// Arc-eager parser state. Node 0 is ROOT; words are 1..num_words. The buffer
// is always the contiguous range [next, num_words].
struct Configuration {
    explicit Configuration(int num_words);

    int num_words = 0;
    std::vector<int> stack; // stack.front() == 0 (ROOT), stack.back() == s0
    int next = 1;           // b0, buffer empty when next > num_words
    std::vector<int> head;  // size num_words+1, -1 = no head yet
    std::vector<std::string> deprel;
    std::vector<int> left_child, right_child; // -1 = none

    int stack_size() const { return static_cast<int>(stack.size()); }
    int buffer_size() const { return num_words - next + 1; }
    bool buffer_empty() const { return next > num_words; }
    bool is_terminal() const { return buffer_empty() && stack.size() == 1; }
    int stack_node(int k) const;  // k-th from top, -1 if absent
    int buffer_node(int k) const; // k-th from front, -1 if absent
    std::vector<Arc> arcs() const;
    void add_arc(int h, int d, const std::string& label);
};

bool is_legal(const Configuration& c, TransitionKind kind);
std::vector<TransitionKind> legal_transitions(const Configuration& c);
void apply_transition(Configuration& c, const Transition& t);

// Static oracle for a projective gold tree. heads/labels are 1-based through
// index 0 being unused; heads[i] is the gold head of word i. The returned
// sequence replays to exactly the gold arc set; stops once the buffer is
// consumed (remaining stack nodes are all attached by then).
std::vector<Transition> oracle_sequence(const std::vector<int>& heads,
                                        const std::vector<std::string>& labels);
std::vector<Transition> oracle_sequence(const conllu::Sentence& gold);

// The 44 canonical feature names: word/pos/lang over the 13 positional nodes
// s0..s3, b0..b3, s0l, s0r, s1l, s1r, b0l plus deprel over the 5 child nodes.
const std::vector<std::string>& parse_feature_names();
std::vector<std::string> parser_slot_names(bool multilingual); // 31 or all 44

// Values aligned with parse_feature_names(). Word features use the normalized
// form; absent nodes yield <null>, ROOT yields <root>; the lang feature maps
// hi/en tags to "hi"/"en" and anything else to <null>.
std::vector<std::string> extract_parse_features(const Configuration& c,
                                                const conllu::Sentence& sentence);

// Ordered inventory: shift, reduce, then left_arc:<label> and right_arc:<label>
// with labels sorted. This fixes argmax tie-breaking across the toolkit.
std::vector<std::string> transition_label_inventory(const std::vector<conllu::Sentence>& treebank);

// Probability (or any score) vector over a fixed transition inventory.
using TransitionScorer = std::function<Eigen::VectorXd(const Configuration&)>;

// Greedy decoding: take the best-scoring legal transition until the buffer is
// consumed, then drain the stack (Reduce when legal, otherwise attach the top
// node to ROOT with label "root"). Total: always yields a full tree.
conllu::Sentence parse_with_scorer(const conllu::Sentence& sentence,
                                   const std::vector<std::string>& inventory,
                                   const TransitionScorer& scorer);

// Maps the model's named slots onto extract_parse_features output, then
// parses with the model's softmax as scorer.
conllu::Sentence greedy_parse(const nn::FeedForwardModel& model, const conllu::Sentence& sentence);

// Picks the model's slot values out of the canonical 44-value vector.
std::vector<int> slot_feature_indexes(const nn::FeedForwardModel& model);

struct ParserModelConfig {
    int word_dim = 80;
    int pos_dim = 20;
    int deprel_dim = 20;
    int hidden_size = 200;
    bool multilingual = false;
    const emb::EmbeddingTable* pretrained = nullptr;
    std::uint64_t seed = 1;
};

nn::FeedForwardModel build_parser_model(const std::vector<conllu::Sentence>& treebank,
                                        const ParserModelConfig& config);

struct TrainingData {
    std::vector<nn::Example> examples;
    int sentences_used = 0;
    int skipped_nonprojective = 0;
};

// Oracle-derived training examples; non-projective sentences are skipped and
// counted. Values follow parser_slot_names(multilingual).
TrainingData build_parser_examples(const std::vector<conllu::Sentence>& treebank, bool multilingual);

} // namespace codemix::parser
