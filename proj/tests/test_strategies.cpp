#include <doctest.h>

#include <string>
#include <vector>

#include "codemix/error.hpp"
#include "codemix/fragments.hpp"
#include "codemix/parser.hpp"
#include "codemix/strategies.hpp"
#include "testutil.hpp"

using namespace codemix;
using conllu::LanguageTag;
using parser::Configuration;
using parser::TransitionKind;

namespace {

conllu::Sentence cm_sentence(const std::vector<std::tuple<std::string, std::string, LanguageTag>>& toks) {
    conllu::Sentence s;
    for (const auto& [form, upos, lang] : toks) {
        conllu::AnnotatedToken tok;
        tok.index = s.size() + 1;
        tok.form = form;
        tok.upos = upos;
        tok.lang = lang;
        s.tokens.push_back(std::move(tok));
    }
    return s;
}

// Small treebank over a shared label set; `prefix` separates the vocabularies.
std::vector<conllu::Sentence> toy_treebank(const std::string& prefix, LanguageTag lang) {
    std::vector<conllu::Sentence> bank;
    auto add = [&](const std::vector<int>& heads, const std::vector<std::string>& labels,
                   const std::vector<std::string>& upos) {
        conllu::Sentence s;
        for (std::size_t i = 0; i < heads.size(); ++i) {
            conllu::AnnotatedToken tok;
            tok.index = static_cast<int>(i) + 1;
            tok.form = prefix + std::to_string(i + 1) + "w" + std::to_string(bank.size());
            tok.upos = upos[i];
            tok.lang = lang;
            tok.head = heads[i];
            tok.deprel = labels[i];
            s.tokens.push_back(std::move(tok));
        }
        bank.push_back(std::move(s));
    };
    add({2, 0, 2}, {"nsubj", "root", "obj"}, {"NOUN", "VERB", "NOUN"});
    add({0, 1, 2}, {"root", "obj", "case"}, {"VERB", "NOUN", "ADP"});
    add({2, 0}, {"nsubj", "root"}, {"NOUN", "VERB"});
    add({3, 3, 0}, {"nsubj", "obj", "root"}, {"NOUN", "NOUN", "VERB"});
    return bank;
}

nn::FeedForwardModel tiny_parser(const std::vector<conllu::Sentence>& bank, bool multilingual,
                                 std::uint64_t seed) {
    parser::ParserModelConfig config;
    config.word_dim = 6;
    config.pos_dim = 3;
    config.deprel_dim = 3;
    config.hidden_size = 12;
    config.multilingual = multilingual;
    config.seed = seed;
    return parser::build_parser_model(bank, config);
}

void check_same_parse(const conllu::Sentence& a, const conllu::Sentence& b) {
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        REQUIRE(a.tokens[static_cast<std::size_t>(i)].head ==
                b.tokens[static_cast<std::size_t>(i)].head);
        REQUIRE(a.tokens[static_cast<std::size_t>(i)].deprel ==
                b.tokens[static_cast<std::size_t>(i)].deprel);
    }
}

} // namespace

TEST_CASE("configuration matrix language votes over closed-class neighbors") {
    conllu::Sentence s = cm_sentence({{"w1", "NOUN", LanguageTag::hi},
                                      {"w2", "ADP", LanguageTag::en},
                                      {"w3", "VERB", LanguageTag::hi},
                                      {"w4", "AUX", LanguageTag::en}});
    strategy::FragmentSegmentation seg = strategy::segment_fragments(s);
    CHECK(seg.matrix_language == LanguageTag::hi); // 2-2 tie
    const std::vector<std::string> pos_set = {"ADP", "AUX", "PART", "VERB"};

    // initial: only b1 (en ADP) votes
    Configuration c(4);
    CHECK(strategy::configuration_matrix_language(c, s, seg, pos_set) == LanguageTag::en);

    // after one shift: b0 = en ADP, b1 = hi VERB tie -> sentence matrix (hi)
    parser::apply_transition(c, {TransitionKind::Shift, ""});
    CHECK(strategy::configuration_matrix_language(c, s, seg, pos_set) == LanguageTag::hi);

    // after two shifts: s0 = en ADP, b0 = hi VERB, b1 = en AUX -> en majority
    parser::apply_transition(c, {TransitionKind::Shift, ""});
    CHECK(strategy::configuration_matrix_language(c, s, seg, pos_set) == LanguageTag::en);

    // an empty voter set falls back to the sentence matrix language
    CHECK(strategy::configuration_matrix_language(c, s, seg, {}) == LanguageTag::hi);
    CHECK(strategy::configuration_matrix_language(c, s, seg, {"PUNCT"}) == LanguageTag::hi);
}

TEST_CASE("check_compatible requires one shared transition inventory") {
    auto hi_bank = toy_treebank("h", LanguageTag::hi);
    auto en_bank = toy_treebank("e", LanguageTag::en);
    nn::FeedForwardModel hi_model = tiny_parser(hi_bank, false, 1);
    nn::FeedForwardModel en_model = tiny_parser(en_bank, false, 2);
    CHECK_NOTHROW(strategy::check_compatible(hi_model, en_model));

    auto odd_bank = en_bank;
    odd_bank[0].tokens[0].deprel = "xcomp";
    nn::FeedForwardModel odd_model = tiny_parser(odd_bank, false, 3);
    CHECK_THROWS_AS(strategy::check_compatible(hi_model, odd_model), ModelError);
}

TEST_CASE("the baseline parses with the sentence matrix language's model") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);

    conllu::Sentence hi_major = cm_sentence({{"h1", "NOUN", LanguageTag::hi},
                                             {"e1", "VERB", LanguageTag::en},
                                             {"h2", "NOUN", LanguageTag::hi}});
    conllu::Sentence via = strategy::parse_monolingual_baseline(hi_model, en_model, hi_major);
    check_same_parse(via, parser::greedy_parse(hi_model, hi_major));

    conllu::Sentence en_major = cm_sentence({{"h1", "NOUN", LanguageTag::hi},
                                             {"e1", "VERB", LanguageTag::en},
                                             {"e2", "NOUN", LanguageTag::en}});
    via = strategy::parse_monolingual_baseline(hi_model, en_model, en_major);
    check_same_parse(via, parser::greedy_parse(en_model, en_major));
}

TEST_CASE("lambda = 1 on a single-language sentence reduces to the matrix parser") {
    auto hi_bank = toy_treebank("h", LanguageTag::hi);
    auto hi_model = tiny_parser(hi_bank, false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);

    conllu::Sentence s = cm_sentence({{"h1w0", "NOUN", LanguageTag::hi},
                                      {"h2w0", "VERB", LanguageTag::hi},
                                      {"h3w0", "ADP", LanguageTag::hi},
                                      {"h1w1", "NOUN", LanguageTag::hi}});
    strategy::InterpolationConfig config;
    config.lambda_m = 1.0;
    conllu::Sentence interp = strategy::parse_interpolated(hi_model, en_model, s, config);
    check_same_parse(interp, parser::greedy_parse(hi_model, s));
}

TEST_CASE("lambda = 0.5 equals an explicit half-and-half scorer") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);

    Rng rng(44);
    std::vector<int> hi_idx = parser::slot_feature_indexes(hi_model);
    std::vector<int> en_idx = parser::slot_feature_indexes(en_model);
    for (int round = 0; round < 8; ++round) {
        int n = 2 + static_cast<int>(rng.index(5));
        std::vector<std::tuple<std::string, std::string, LanguageTag>> toks;
        static const std::vector<std::string> upos_pool = {"NOUN", "VERB", "ADP", "AUX"};
        for (int i = 0; i < n; ++i)
            toks.emplace_back("h" + std::to_string(1 + rng.index(3)) + "w" + std::to_string(rng.index(4)),
                              upos_pool[rng.index(upos_pool.size())],
                              rng.bernoulli(0.5) ? LanguageTag::hi : LanguageTag::en);
        conllu::Sentence s = cm_sentence(toks);
        strategy::InterpolationConfig config;
        config.lambda_m = 0.5;
        conllu::Sentence via_api = strategy::parse_interpolated(hi_model, en_model, s, config);

        auto scorer = [&](const Configuration& c) {
            std::vector<std::string> all = parser::extract_parse_features(c, s);
            std::vector<std::string> hv, ev;
            for (int k : hi_idx) hv.push_back(all[static_cast<std::size_t>(k)]);
            for (int k : en_idx) ev.push_back(all[static_cast<std::size_t>(k)]);
            return Eigen::VectorXd(0.5 * nn::forward(hi_model, hv) + 0.5 * nn::forward(en_model, ev));
        };
        conllu::Sentence reference = parser::parse_with_scorer(s, hi_model.labels, scorer);
        check_same_parse(via_api, reference);
    }
}

TEST_CASE("interpolation validates lambda and compatibility") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);
    conllu::Sentence s = cm_sentence({{"h1", "NOUN", LanguageTag::hi}});

    strategy::InterpolationConfig config;
    config.lambda_m = -0.01;
    CHECK_THROWS_AS(strategy::parse_interpolated(hi_model, en_model, s, config), ValidationError);
    config.lambda_m = 1.01;
    CHECK_THROWS_AS(strategy::parse_interpolated(hi_model, en_model, s, config), ValidationError);
}

TEST_CASE("the multilingual strategy resolves languages but restores the originals") {
    auto hi_bank = toy_treebank("h", LanguageTag::hi);
    auto en_bank = toy_treebank("e", LanguageTag::en);
    std::vector<conllu::Sentence> both = hi_bank;
    both.insert(both.end(), en_bank.begin(), en_bank.end());
    nn::FeedForwardModel model = tiny_parser(both, true, 9);

    conllu::Sentence s = cm_sentence({{"h1w0", "NOUN", LanguageTag::hi},
                                      {".", "PUNCT", LanguageTag::univ},
                                      {"e1w0", "VERB", LanguageTag::en},
                                      {"delhi", "PROPN", LanguageTag::ne}});
    conllu::Sentence out = strategy::parse_multilingual(model, s);
    REQUIRE(out.size() == 4);
    CHECK(out.tokens[1].lang == LanguageTag::univ); // original tags survive
    CHECK(out.tokens[3].lang == LanguageTag::ne);
    CHECK(conllu::is_well_formed_tree(out));

    // equivalent formulation: parse the language-resolved copy directly
    strategy::FragmentSegmentation seg = strategy::segment_fragments(s);
    conllu::Sentence resolved = strategy::resolve_languages(s, seg);
    conllu::Sentence direct = parser::greedy_parse(model, resolved);
    check_same_parse(out, direct);
}

TEST_CASE("multipass with a single fragment short-circuits to the baseline") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);
    conllu::Sentence s = cm_sentence({{"h1w0", "NOUN", LanguageTag::hi},
                                      {"h2w0", "VERB", LanguageTag::hi},
                                      {"h1w1", "NOUN", LanguageTag::hi}});
    for (auto mode : {strategy::MultipassMode::fragment_wise,
                      strategy::MultipassMode::subordinate_first}) {
        conllu::Sentence out = strategy::parse_multipass(hi_model, en_model, s, mode);
        check_same_parse(out, strategy::parse_monolingual_baseline(hi_model, en_model, s));
    }
}

TEST_CASE("fragment-wise multipass keeps fragment-internal structure") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);

    conllu::Sentence s = cm_sentence({{"h1w0", "NOUN", LanguageTag::hi},
                                      {"h2w0", "VERB", LanguageTag::hi},
                                      {"e1w0", "NOUN", LanguageTag::en},
                                      {"e2w0", "VERB", LanguageTag::en},
                                      {"h1w1", "NOUN", LanguageTag::hi}});
    strategy::FragmentSegmentation seg = strategy::segment_fragments(s);
    REQUIRE(seg.fragments.size() == 3);
    CHECK(seg.matrix_language == LanguageTag::hi);

    conllu::Sentence out = strategy::parse_multipass(hi_model, en_model, s,
                                                     strategy::MultipassMode::fragment_wise);
    REQUIRE(out.size() == 5);
    for (const auto& tok : out.tokens) REQUIRE(tok.head.has_value());
    CHECK(conllu::is_well_formed_tree(out));

    // every fragment keeps its standalone parse except the fragment root,
    // which pass 2 reattaches; extra standalone roots hang off it as "dep"
    for (const auto& frag : seg.fragments) {
        conllu::Sentence sub;
        for (int i = frag.start; i <= frag.end; ++i) {
            conllu::AnnotatedToken tok = s.tokens[static_cast<std::size_t>(i - 1)];
            tok.index = i - frag.start + 1;
            tok.head.reset();
            tok.deprel.clear();
            sub.tokens.push_back(std::move(tok));
        }
        const auto& model = frag.lang == LanguageTag::hi ? hi_model : en_model;
        conllu::Sentence standalone = parser::greedy_parse(model, sub);
        int root = 0;
        for (int i = frag.start; i <= frag.end && root == 0; ++i)
            if (*standalone.tokens[static_cast<std::size_t>(i - frag.start)].head == 0) root = i;
        REQUIRE(root != 0);
        for (int i = frag.start; i <= frag.end; ++i) {
            int local = i - frag.start;
            int sub_head = *standalone.tokens[static_cast<std::size_t>(local)].head;
            const auto& tok = out.tokens[static_cast<std::size_t>(i - 1)];
            if (i == root) {
                bool outside = *tok.head == 0 || *tok.head < frag.start || *tok.head > frag.end;
                CHECK(outside);
            } else if (sub_head == 0) {
                CHECK(*tok.head == root);
                CHECK(tok.deprel == "dep");
            } else {
                CHECK(*tok.head == sub_head + frag.start - 1);
                CHECK(tok.deprel == standalone.tokens[static_cast<std::size_t>(local)].deprel);
            }
        }
    }
}

TEST_CASE("subordinate-first multipass reparses matrix tokens in context") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto en_model = tiny_parser(toy_treebank("e", LanguageTag::en), false, 2);

    conllu::Sentence s = cm_sentence({{"h1w0", "NOUN", LanguageTag::hi},
                                      {"h2w0", "VERB", LanguageTag::hi},
                                      {"e1w0", "NOUN", LanguageTag::en},
                                      {"e2w0", "VERB", LanguageTag::en},
                                      {"h1w1", "NOUN", LanguageTag::hi}});
    strategy::FragmentSegmentation seg = strategy::segment_fragments(s);
    conllu::Sentence out = strategy::parse_multipass(hi_model, en_model, s,
                                                     strategy::MultipassMode::subordinate_first);
    REQUIRE(out.size() == 5);
    CHECK(conllu::is_well_formed_tree(out));

    // subordinate (en) fragment keeps its internal arcs from pass 1
    const strategy::Fragment& en_frag = seg.fragments[1];
    REQUIRE(en_frag.lang == LanguageTag::en);
    conllu::Sentence sub;
    for (int i = en_frag.start; i <= en_frag.end; ++i) {
        conllu::AnnotatedToken tok = s.tokens[static_cast<std::size_t>(i - 1)];
        tok.index = i - en_frag.start + 1;
        sub.tokens.push_back(std::move(tok));
    }
    conllu::Sentence standalone = parser::greedy_parse(en_model, sub);
    int root = 0;
    for (int i = en_frag.start; i <= en_frag.end && root == 0; ++i)
        if (*standalone.tokens[static_cast<std::size_t>(i - en_frag.start)].head == 0) root = i;
    REQUIRE(root != 0);
    for (int i = en_frag.start; i <= en_frag.end; ++i) {
        int local = i - en_frag.start;
        int sub_head = *standalone.tokens[static_cast<std::size_t>(local)].head;
        const auto& tok = out.tokens[static_cast<std::size_t>(i - 1)];
        if (i == root) {
            bool outside = *tok.head == 0 || *tok.head < en_frag.start || *tok.head > en_frag.end;
            CHECK(outside);
        } else if (sub_head == 0) {
            CHECK(*tok.head == root);
            CHECK(tok.deprel == "dep");
        } else {
            CHECK(*tok.head == sub_head + en_frag.start - 1);
        }
    }
}

TEST_CASE("multipass requires compatible models on multi-fragment sentences") {
    auto hi_model = tiny_parser(toy_treebank("h", LanguageTag::hi), false, 1);
    auto odd_bank = toy_treebank("e", LanguageTag::en);
    odd_bank[0].tokens[0].deprel = "xcomp";
    nn::FeedForwardModel odd_model = tiny_parser(odd_bank, false, 3);

    conllu::Sentence s = cm_sentence({{"h1w0", "NOUN", LanguageTag::hi},
                                      {"e1w0", "VERB", LanguageTag::en}});
    for (auto mode : {strategy::MultipassMode::fragment_wise,
                      strategy::MultipassMode::subordinate_first})
        CHECK_THROWS_AS(strategy::parse_multipass(hi_model, odd_model, s, mode), ModelError);
}
