#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "codemix/error.hpp"
#include "codemix/parser.hpp"
#include "codemix/rng.hpp"
#include "testutil.hpp"

using namespace codemix;
using parser::Configuration;
using parser::Transition;
using parser::TransitionKind;

namespace {

// Builds a sentence from 0-based head/label lists (one entry per token).
conllu::Sentence sent(const std::vector<int>& heads, const std::vector<std::string>& labels) {
    std::vector<int> h(heads.size() + 1, -1);
    std::vector<std::string> l(labels.size() + 1);
    for (std::size_t i = 0; i < heads.size(); ++i) {
        h[i + 1] = heads[i];
        l[i + 1] = labels[i];
    }
    return testutil::make_sentence(h, l);
}

// Replays the oracle and checks it reproduces exactly the gold arcs.
void check_oracle_replay(const std::vector<int>& heads, const std::vector<std::string>& labels) {
    int n = static_cast<int>(heads.size()) - 1;
    std::vector<Transition> seq = parser::oracle_sequence(heads, labels);
    REQUIRE(seq.size() <= 2 * static_cast<std::size_t>(n));
    Configuration c(n);
    for (const auto& t : seq) {
        REQUIRE(parser::is_legal(c, t.kind));
        parser::apply_transition(c, t);
    }
    REQUIRE(c.buffer_empty());
    for (int i = 1; i <= n; ++i) {
        REQUIRE(c.head[static_cast<std::size_t>(i)] == heads[static_cast<std::size_t>(i)]);
        REQUIRE(c.deprel[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(i)]);
    }
}

std::vector<std::string> label_cycle(int n) {
    static const std::vector<std::string> pool = {"nsubj", "obj", "nmod", "amod", "case"};
    std::vector<std::string> labels(static_cast<std::size_t>(n) + 1);
    for (int i = 1; i <= n; ++i)
        labels[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i) % pool.size()];
    return labels;
}

} // namespace

TEST_CASE("transition names round-trip") {
    CHECK(parser::transition_name({TransitionKind::Shift, ""}) == "shift");
    CHECK(parser::transition_name({TransitionKind::Reduce, ""}) == "reduce");
    CHECK(parser::transition_name({TransitionKind::LeftArc, "nsubj"}) == "left_arc:nsubj");
    CHECK(parser::transition_name({TransitionKind::RightArc, "obj"}) == "right_arc:obj");
    for (const char* name : {"shift", "reduce", "left_arc:case", "right_arc:root"})
        CHECK(parser::transition_name(parser::parse_transition(name)) == name);
    CHECK_THROWS_AS(parser::parse_transition("hop"), ValidationError);
    CHECK_THROWS_AS(parser::parse_transition("left_arc:"), ValidationError);
}

TEST_CASE("legality in the initial and terminal configurations") {
    Configuration c(2);
    CHECK(c.stack == std::vector<int>{0});
    CHECK(c.buffer_size() == 2);
    CHECK(parser::is_legal(c, TransitionKind::Shift));
    CHECK(parser::is_legal(c, TransitionKind::RightArc));
    CHECK_FALSE(parser::is_legal(c, TransitionKind::LeftArc));  // s0 is ROOT
    CHECK_FALSE(parser::is_legal(c, TransitionKind::Reduce));   // s0 has no head
    CHECK_FALSE(c.is_terminal());

    parser::apply_transition(c, {TransitionKind::RightArc, "root"});
    parser::apply_transition(c, {TransitionKind::RightArc, "obj"});
    CHECK(c.buffer_empty());
    CHECK_FALSE(parser::is_legal(c, TransitionKind::Shift));
    CHECK_FALSE(parser::is_legal(c, TransitionKind::LeftArc));
    CHECK_FALSE(parser::is_legal(c, TransitionKind::RightArc));
    CHECK(parser::is_legal(c, TransitionKind::Reduce));
    parser::apply_transition(c, {TransitionKind::Reduce, ""});
    parser::apply_transition(c, {TransitionKind::Reduce, ""});
    CHECK(c.is_terminal());
    CHECK(parser::legal_transitions(c).empty());
}

TEST_CASE("applying an illegal transition throws") {
    Configuration c(1);
    CHECK_THROWS_AS(parser::apply_transition(c, {TransitionKind::Reduce, ""}), ValidationError);
    CHECK_THROWS_AS(parser::apply_transition(c, {TransitionKind::LeftArc, "x"}), ValidationError);
}

TEST_CASE("oracle hand cases") {
    SUBCASE("left then right") {
        std::vector<int> heads = {0, 2, 0};
        std::vector<std::string> labels = {"", "nsubj", "root"};
        std::vector<Transition> seq = parser::oracle_sequence(heads, labels);
        REQUIRE(seq.size() == 3);
        CHECK(parser::transition_name(seq[0]) == "shift");
        CHECK(parser::transition_name(seq[1]) == "left_arc:nsubj");
        CHECK(parser::transition_name(seq[2]) == "right_arc:root");
    }
    SUBCASE("reduce to reach a lower head") {
        std::vector<int> heads = {0, 0, 1, 1};
        std::vector<std::string> labels = {"", "root", "amod", "obj"};
        std::vector<Transition> seq = parser::oracle_sequence(heads, labels);
        std::vector<std::string> names;
        for (const auto& t : seq) names.push_back(parser::transition_name(t));
        CHECK(names == std::vector<std::string>{"right_arc:root", "right_arc:amod", "reduce",
                                                "right_arc:obj"});
    }
    SUBCASE("single word") {
        std::vector<Transition> seq = parser::oracle_sequence({0, 0}, {"", "root"});
        REQUIRE(seq.size() == 1);
        CHECK(parser::transition_name(seq[0]) == "right_arc:root");
    }
}

TEST_CASE("oracle replay reproduces every projective tree exhaustively (n <= 4)") {
    for (int n = 1; n <= 4; ++n) {
        std::vector<std::vector<int>> trees;
        testutil::enumerate_projective(n, trees);
        REQUIRE(!trees.empty());
        for (const auto& heads : trees) check_oracle_replay(heads, label_cycle(n));
    }
}

TEST_CASE("oracle replay reproduces random projective trees") {
    Rng rng(2024);
    for (int round = 0; round < 300; ++round) {
        int n = 1 + static_cast<int>(rng.index(8));
        std::vector<int> heads = testutil::random_projective_heads(rng, n);
        check_oracle_replay(heads, testutil::random_labels(rng, heads));
    }
}

TEST_CASE("oracle rejects non-projective trees naming the crossing arcs") {
    // arcs 3->1 and 4->2 cross
    std::vector<int> heads = {0, 3, 4, 0, 3};
    std::vector<std::string> labels = {"", "dep", "dep", "root", "dep"};
    try {
        parser::oracle_sequence(heads, labels);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("crosses") != std::string::npos);
        CHECK(msg.find("3->1") != std::string::npos);
        CHECK(msg.find("4->2") != std::string::npos);
    }
    CHECK_THROWS_AS(parser::oracle_sequence({0, 5}, {"", "root"}), ValidationError);
    CHECK_THROWS_AS(parser::oracle_sequence({0, 1}, {"", "root"}), ValidationError);
}

TEST_CASE("oracle over sentences requires gold heads") {
    conllu::Sentence s = sent({0, 1}, {"root", "obj"});
    CHECK(parser::oracle_sequence(s).size() == 2);
    s.tokens[1].head.reset();
    s.sent_id = "s-9";
    try {
        parser::oracle_sequence(s);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("s-9") != std::string::npos);
    }
}

TEST_CASE("any legal policy terminates within 2n transitions") {
    Rng rng(7);
    for (int round = 0; round < 1000; ++round) {
        int n = 1 + static_cast<int>(rng.index(10));
        Configuration c(n);
        int steps = 0;
        while (!c.is_terminal()) {
            std::vector<TransitionKind> legal = parser::legal_transitions(c);
            if (legal.empty()) break; // dead end: no moves left
            TransitionKind k = legal[rng.index(legal.size())];
            bool arc = k == TransitionKind::LeftArc || k == TransitionKind::RightArc;
            parser::apply_transition(c, {k, arc ? "dep" : ""});
            ++steps;
            REQUIRE(steps <= 2 * n);
        }
        CHECK(steps <= 2 * n);
    }
}

TEST_CASE("canonical feature names and slot subsets") {
    const auto& names = parser::parse_feature_names();
    REQUIRE(names.size() == 44);
    CHECK(names[0] == "word:s0");
    CHECK(names[4] == "word:b0");
    CHECK(names[13] == "pos:s0");
    CHECK(names[26] == "lang:s0");
    CHECK(names[39] == "deprel:s0l");
    CHECK(names[43] == "deprel:b0l");
    CHECK(std::count_if(names.begin(), names.end(),
                        [](const std::string& n) { return n.rfind("lang:", 0) == 0; }) == 13);

    CHECK(parser::parser_slot_names(false).size() == 31);
    CHECK(parser::parser_slot_names(true) == names);
    for (const auto& n : parser::parser_slot_names(false)) CHECK(n.rfind("lang:", 0) != 0);
}

TEST_CASE("feature extraction hand case") {
    conllu::Sentence s = sent({2, 0, 2}, {"nsubj", "root", "obj"});
    s.tokens[0].form = "raam";
    s.tokens[0].norm = "राम";
    s.tokens[1].form = "khata";
    s.tokens[2].form = "khana";
    s.tokens[0].upos = "PROPN";
    s.tokens[1].upos = "VERB";
    s.tokens[2].upos = "NOUN";
    s.tokens[0].lang = conllu::LanguageTag::hi;
    s.tokens[1].lang = conllu::LanguageTag::en;
    s.tokens[2].lang = conllu::LanguageTag::ne;

    const auto& names = parser::parse_feature_names();
    auto value_of = [&](const std::vector<std::string>& values, const std::string& name) {
        auto it = std::find(names.begin(), names.end(), name);
        REQUIRE(it != names.end());
        return values[static_cast<std::size_t>(it - names.begin())];
    };

    Configuration c(3);
    std::vector<std::string> v = parser::extract_parse_features(c, s);
    REQUIRE(v.size() == 44);
    CHECK(value_of(v, "word:s0") == "<root>");
    CHECK(value_of(v, "word:s1") == "<null>");
    CHECK(value_of(v, "word:b0") == "राम"); // normalized form, not the surface
    CHECK(value_of(v, "word:b1") == "khata");
    CHECK(value_of(v, "word:b2") == "khana");
    CHECK(value_of(v, "word:b3") == "<null>");
    CHECK(value_of(v, "pos:s0") == "<root>");
    CHECK(value_of(v, "pos:b0") == "PROPN");
    CHECK(value_of(v, "lang:s0") == "<null>");
    CHECK(value_of(v, "lang:b0") == "hi");
    CHECK(value_of(v, "deprel:s0l") == "<null>");

    // shift raam, then left-arc it under khata; khata's left child is raam
    parser::apply_transition(c, {TransitionKind::Shift, ""});
    parser::apply_transition(c, {TransitionKind::LeftArc, "nsubj"});
    parser::apply_transition(c, {TransitionKind::RightArc, "root"});
    v = parser::extract_parse_features(c, s);
    CHECK(value_of(v, "word:s0") == "khata");
    CHECK(value_of(v, "lang:s0") == "en");
    CHECK(value_of(v, "word:s0l") == "राम");
    CHECK(value_of(v, "deprel:s0l") == "nsubj");
    CHECK(value_of(v, "word:b0") == "khana");
    CHECK(value_of(v, "lang:b0") == "<null>"); // ne maps to <null>
    CHECK(value_of(v, "word:s1") == "<root>");
}

TEST_CASE("transition inventory is ordered and deduplicated") {
    conllu::Sentence a = sent({2, 0}, {"nsubj", "root"});
    conllu::Sentence b = sent({0, 1}, {"root", "obj"});
    std::vector<std::string> inv = parser::transition_label_inventory({a, b});
    CHECK(inv == std::vector<std::string>{"shift", "reduce", "left_arc:nsubj", "left_arc:obj",
                                          "left_arc:root", "right_arc:nsubj", "right_arc:obj",
                                          "right_arc:root"});
    conllu::Sentence empty = sent({0}, {"root"});
    empty.tokens[0].deprel.clear();
    CHECK_THROWS_AS(parser::transition_label_inventory({empty}), ValidationError);
}

TEST_CASE("greedy drain attaches leftovers to ROOT") {
    conllu::Sentence s = sent({0, 1, 1}, {"root", "a", "b"});
    std::vector<std::string> inv = {"shift", "reduce", "left_arc:dep", "right_arc:dep"};
    // constant scores preferring shift: buffer drains with nothing attached
    auto scorer = [](const Configuration&) {
        Eigen::VectorXd v(4);
        v << 1.0, 0.5, 0.1, 0.2;
        return v;
    };
    conllu::Sentence out = parser::parse_with_scorer(s, inv, scorer);
    for (const auto& tok : out.tokens) {
        REQUIRE(tok.head.has_value());
        CHECK(*tok.head == 0);
        CHECK(tok.deprel == "root");
    }
    conllu::validate_heads(out);
}

TEST_CASE("parse_with_scorer validates score dimensions") {
    conllu::Sentence s = sent({0}, {"root"});
    std::vector<std::string> inv = {"shift", "reduce", "left_arc:dep", "right_arc:dep"};
    auto bad = [](const Configuration&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(3)); };
    CHECK_THROWS_AS(parser::parse_with_scorer(s, inv, bad), ValidationError);
}

TEST_CASE("parse_with_scorer always yields a full tree under random scores") {
    Rng rng(99);
    std::vector<std::string> inv = {"shift",         "reduce",        "left_arc:dep",
                                    "right_arc:dep", "left_arc:root", "right_arc:root"};
    for (int round = 0; round < 50; ++round) {
        int n = 1 + static_cast<int>(rng.index(10));
        conllu::Sentence s = sent(std::vector<int>(static_cast<std::size_t>(n), 0),
                                  std::vector<std::string>(static_cast<std::size_t>(n), "root"));
        std::uint64_t seed = rng.bits();
        auto scorer = [&inv, seed](const Configuration& c) {
            Rng local(seed ^ (static_cast<std::uint64_t>(c.next) << 32) ^
                      static_cast<std::uint64_t>(c.stack_size()));
            Eigen::VectorXd v(static_cast<Eigen::Index>(inv.size()));
            for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = local.uniform(0.0, 1.0);
            return v;
        };
        conllu::Sentence out = parser::parse_with_scorer(s, inv, scorer);
        REQUIRE(out.size() == n);
        for (const auto& tok : out.tokens) REQUIRE(tok.head.has_value());
        conllu::validate_heads(out);
        CHECK(conllu::is_well_formed_tree(out));
    }
}

TEST_CASE("build_parser_examples skips non-projective sentences") {
    conllu::Sentence good = sent({0, 1}, {"root", "obj"});
    conllu::Sentence bad = sent({3, 4, 0, 3}, {"dep", "dep", "root", "dep"});
    parser::TrainingData data = parser::build_parser_examples({good, bad}, false);
    CHECK(data.sentences_used == 1);
    CHECK(data.skipped_nonprojective == 1);
    CHECK(data.examples.size() == parser::oracle_sequence(good).size());
    for (const auto& ex : data.examples) {
        CHECK(ex.values.size() == parser::parser_slot_names(false).size());
        CHECK(!ex.gold.empty());
    }
    CHECK_THROWS_AS(parser::build_parser_examples({bad}, false), ValidationError);
}

TEST_CASE("parser model slots map onto the canonical feature vector") {
    std::vector<conllu::Sentence> treebank = {sent({2, 0, 2}, {"nsubj", "root", "obj"})};

    for (bool multilingual : {false, true}) {
        parser::ParserModelConfig config;
        config.word_dim = 4;
        config.pos_dim = 2;
        config.deprel_dim = 2;
        config.hidden_size = 8;
        config.multilingual = multilingual;
        nn::FeedForwardModel model = parser::build_parser_model(treebank, config);
        CHECK(model.task == "parser");
        CHECK(model.labels == parser::transition_label_inventory(treebank));

        std::vector<int> idx = parser::slot_feature_indexes(model);
        REQUIRE(idx.size() == model.slots.size());
        const auto& names = parser::parse_feature_names();
        for (std::size_t k = 0; k < idx.size(); ++k)
            CHECK(names[static_cast<std::size_t>(idx[k])] == model.slots[k].name);
    }

    nn::FeedForwardModel other =
        nn::build_model("parser", {nn::language_table_spec()}, {{"bogus", "lang"}}, {"shift"}, 2, 1);
    CHECK_THROWS_AS(parser::slot_feature_indexes(other), ModelError);
}

TEST_CASE("greedy_parse yields valid trees even untrained") {
    std::vector<conllu::Sentence> treebank;
    Rng rng(5);
    for (int i = 0; i < 4; ++i) {
        std::vector<int> heads = testutil::random_projective_heads(rng, 5);
        treebank.push_back(testutil::make_sentence(heads, testutil::random_labels(rng, heads)));
    }
    parser::ParserModelConfig config;
    config.word_dim = 8;
    config.pos_dim = 4;
    config.deprel_dim = 4;
    config.hidden_size = 16;
    nn::FeedForwardModel model = parser::build_parser_model(treebank, config);
    for (const auto& gold : treebank) {
        conllu::Sentence out = parser::greedy_parse(model, gold);
        CHECK(conllu::is_well_formed_tree(out));
    }
}
