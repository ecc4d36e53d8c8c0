// Python bindings for the code-mixed parsing toolkit. Sentences and models
// are bound as classes; single-sentence operations mutate in place, while
// corpus-level helpers take and return lists (converted by copy).
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl_bind.h>

#include <sstream>
#include <string>
#include <vector>

#include "codemix/conllu.hpp"
#include "codemix/error.hpp"
#include "codemix/fragments.hpp"
#include "codemix/kneser_ney.hpp"
#include "codemix/lid.hpp"
#include "codemix/metrics.hpp"
#include "codemix/nn.hpp"
#include "codemix/normalizer.hpp"
#include "codemix/parser.hpp"
#include "codemix/pos.hpp"
#include "codemix/strategies.hpp"
#include "codemix/translit.hpp"

namespace py = pybind11;
using namespace codemix;

PYBIND11_MAKE_OPAQUE(std::vector<conllu::AnnotatedToken>);

namespace {

std::string lang_str(const std::optional<conllu::LanguageTag>& tag) {
    return tag ? conllu::to_string(*tag) : "";
}

std::optional<conllu::LanguageTag> lang_from(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto tag = conllu::parse_language_tag(s);
    if (!tag) throw ValidationError("unknown language tag '" + s + "'");
    return tag;
}

nn::TrainerConfig trainer_config(int epochs, int batch_size, double learning_rate, double l2,
                                 double dropout, std::uint64_t seed) {
    nn::TrainerConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.learning_rate = learning_rate;
    cfg.l2_lambda = l2;
    cfg.dropout_prob = dropout;
    cfg.seed = seed;
    return cfg;
}

strategy::MultipassMode multipass_mode(const std::string& mode) {
    if (mode == "fragment-wise") return strategy::MultipassMode::fragment_wise;
    if (mode == "subordinate-first") return strategy::MultipassMode::subordinate_first;
    throw ValidationError("mode must be 'fragment-wise' or 'subordinate-first'");
}

} // namespace

PYBIND11_MODULE(_codemix, m) {
    m.doc() = "Dependency parsing toolkit for Hindi-English code-mixed text";

    // Base first: later registrations are matched first, so subclasses win.
    py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<ModelError>(m, "ModelError");

    py::class_<conllu::AnnotatedToken>(m, "Token")
        .def(py::init<>())
        .def_readwrite("index", &conllu::AnnotatedToken::index)
        .def_readwrite("form", &conllu::AnnotatedToken::form)
        .def_readwrite("norm", &conllu::AnnotatedToken::norm)
        .def_readwrite("lemma", &conllu::AnnotatedToken::lemma)
        .def_readwrite("upos", &conllu::AnnotatedToken::upos)
        .def_readwrite("head", &conllu::AnnotatedToken::head)
        .def_readwrite("deprel", &conllu::AnnotatedToken::deprel)
        .def_property(
            "lang", [](const conllu::AnnotatedToken& t) { return lang_str(t.lang); },
            [](conllu::AnnotatedToken& t, const std::string& s) { t.lang = lang_from(s); })
        .def_property_readonly("effective_form", &conllu::AnnotatedToken::effective_form)
        .def(py::self == py::self)
        .def("__repr__", [](const conllu::AnnotatedToken& t) {
            return "Token(" + std::to_string(t.index) + ", '" + t.form + "')";
        });

    py::bind_vector<std::vector<conllu::AnnotatedToken>>(m, "TokenList");

    py::class_<conllu::Sentence>(m, "Sentence")
        .def(py::init<>())
        .def_readwrite("sent_id", &conllu::Sentence::sent_id)
        .def_readwrite("raw_text", &conllu::Sentence::raw_text)
        .def_readwrite("tokens", &conllu::Sentence::tokens)
        .def("__len__", &conllu::Sentence::size)
        .def(py::self == py::self)
        .def("__repr__", [](const conllu::Sentence& s) {
            return "Sentence('" + s.sent_id + "', " + std::to_string(s.tokens.size()) +
                   " tokens)";
        });

    // ----- CoNLL-U I/O -----
    m.def("read_conllu", [](const std::string& text) {
        std::istringstream in(text);
        return conllu::read_conllu(in);
    }, py::arg("text"), "Parse CoNLL-U text into sentences.");
    m.def("read_conllu_file", &conllu::read_conllu_file, py::arg("path"));
    m.def("write_conllu", &conllu::write_conllu_string, py::arg("sentences"),
          "Serialize sentences to CoNLL-U text.");
    m.def("write_conllu_file", &conllu::write_conllu_file, py::arg("sentences"), py::arg("path"));
    m.def("mixing_ratio", &conllu::mixing_ratio, py::arg("sentences"),
          "Mean per-sentence share of Hindi among Hindi+English tokens.");

    // ----- models -----
    py::class_<nn::FeedForwardModel>(m, "Model")
        .def_readonly("task", &nn::FeedForwardModel::task)
        .def_readonly("labels", &nn::FeedForwardModel::labels)
        .def("save", &nn::save_model_file, py::arg("path"))
        .def("__repr__", [](const nn::FeedForwardModel& model) {
            return "Model(task='" + model.task + "', " + std::to_string(model.labels.size()) +
                   " labels)";
        });
    m.def("load_model", &nn::load_model_file, py::arg("path"));

    py::class_<translit::TransducerModel>(m, "Transducer")
        .def("save", &translit::save_transducer_file, py::arg("path"));
    m.def("load_transducer", &translit::load_transducer_file, py::arg("path"));

    py::class_<kn::TrigramLM>(m, "TrigramLM")
        .def("log_prob", &kn::TrigramLM::log_prob, py::arg("history"), py::arg("word"),
             "Natural-log p(word | history); history is truncated to the last two tokens.")
        .def("in_vocab", &kn::TrigramLM::in_vocab, py::arg("word"))
        .def_property_readonly("vocab", &kn::TrigramLM::predictable_vocab)
        .def("save_arpa", &kn::TrigramLM::save_arpa_file, py::arg("path"));
    m.def("train_lm", &kn::TrigramLM::train, py::arg("corpus"),
          py::call_guard<py::gil_scoped_release>(),
          "Train an interpolated modified Kneser-Ney trigram model.");
    m.def("load_arpa", &kn::TrigramLM::load_arpa_file, py::arg("path"));

    // ----- training -----
    m.def("train_lid",
          [](const std::vector<conllu::Sentence>& corpus, int hidden, int epochs, int batch_size,
             double learning_rate, double l2, double dropout, std::uint64_t seed) {
              lid::LidModelConfig mc;
              mc.hidden_size = hidden;
              mc.seed = seed;
              nn::FeedForwardModel model = lid::build_lid_model(corpus, mc);
              nn::train(model, lid::build_lid_examples(corpus),
                        trainer_config(epochs, batch_size, learning_rate, l2, dropout, seed));
              return model;
          },
          py::arg("corpus"), py::arg("hidden") = 200, py::arg("epochs") = 20,
          py::arg("batch_size") = 32, py::arg("learning_rate") = 0.01, py::arg("l2") = 1e-8,
          py::arg("dropout") = 0.5, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "Train the token language identifier on a Lang-tagged corpus.");

    m.def("train_pos",
          [](const std::vector<conllu::Sentence>& corpus, bool multilingual, int hidden,
             int epochs, int batch_size, double learning_rate, double l2, double dropout,
             std::uint64_t seed) {
              pos::TaggerModelConfig mc;
              mc.hidden_size = hidden;
              mc.multilingual = multilingual;
              mc.seed = seed;
              nn::FeedForwardModel model = pos::build_tagger_model(corpus, mc);
              nn::train(model, pos::build_tagger_examples(corpus, multilingual),
                        trainer_config(epochs, batch_size, learning_rate, l2, dropout, seed));
              return model;
          },
          py::arg("corpus"), py::arg("multilingual") = false, py::arg("hidden") = 200,
          py::arg("epochs") = 20, py::arg("batch_size") = 32, py::arg("learning_rate") = 0.01,
          py::arg("l2") = 1e-8, py::arg("dropout") = 0.5, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>(), "Train a POS tagger on a UPOS-tagged corpus.");

    m.def("train_parser",
          [](const std::vector<conllu::Sentence>& corpus, bool multilingual, int hidden,
             int epochs, int batch_size, double learning_rate, double l2, double dropout,
             std::uint64_t seed) {
              parser::ParserModelConfig mc;
              mc.hidden_size = hidden;
              mc.multilingual = multilingual;
              mc.seed = seed;
              nn::FeedForwardModel model = parser::build_parser_model(corpus, mc);
              nn::train(model, parser::build_parser_examples(corpus, multilingual).examples,
                        trainer_config(epochs, batch_size, learning_rate, l2, dropout, seed));
              return model;
          },
          py::arg("corpus"), py::arg("multilingual") = false, py::arg("hidden") = 200,
          py::arg("epochs") = 20, py::arg("batch_size") = 32, py::arg("learning_rate") = 0.01,
          py::arg("l2") = 1e-8, py::arg("dropout") = 0.5, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "Train an arc-eager parser on a treebank (non-projective sentences are skipped).");

    m.def("train_transducer",
          [](const std::vector<std::pair<std::string, std::string>>& pairs, int epochs, int beam,
             std::uint64_t seed) {
              translit::PerceptronConfig cfg;
              cfg.epochs = epochs;
              cfg.beam = beam;
              cfg.seed = seed;
              return translit::train_transducer(pairs, cfg);
          },
          py::arg("pairs"), py::arg("epochs") = 10, py::arg("beam") = 5, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "Train the character transducer on (source, target) word pairs.");

    // ----- pipeline stages -----
    m.def("tag_languages", &lid::tag_languages, py::arg("model"), py::arg("sentence"),
          "Predict a language tag for every token (in place).");

    m.def("tag_pos",
          [](const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model,
             conllu::Sentence& s) {
              pos::tag_pos_monolingual(hi_model, en_model, s, strategy::segment_fragments(s));
          },
          py::arg("hi_model"), py::arg("en_model"), py::arg("sentence"),
          "Tag each fragment with its language's tagger (in place).");

    m.def("tag_pos_multilingual",
          [](const nn::FeedForwardModel& model, conllu::Sentence& s) {
              pos::tag_pos_multilingual(model, s, strategy::segment_fragments(s));
          },
          py::arg("model"), py::arg("sentence"),
          "Tag the whole sentence with one language-aware tagger (in place).");

    py::class_<norm::Normalizer>(m, "Normalizer")
        .def(py::init([](const translit::TransducerModel& hi_transducer,
                         const translit::TransducerModel& en_transducer, const kn::TrigramLM& hi_lm,
                         const kn::TrigramLM& en_lm, int beam) {
                 norm::Normalizer n;
                 n.hi_transducer = hi_transducer;
                 n.en_transducer = en_transducer;
                 n.hi_lm = hi_lm;
                 n.en_lm = en_lm;
                 n.beam = beam;
                 return n;
             }),
             py::arg("hi_transducer"), py::arg("en_transducer"), py::arg("hi_lm"),
             py::arg("en_lm"), py::arg("beam") = 5)
        .def_readwrite("beam", &norm::Normalizer::beam)
        .def("normalize", &norm::Normalizer::normalize, py::arg("sentence"),
             "Fill token.norm with the LM-best back-transliteration (in place).");

    m.def("kbest_transduce",
          [](const translit::TransducerModel& model, const std::string& word, int b) {
              std::vector<std::pair<std::string, double>> out;
              for (const auto& c : translit::kbest_transduce(model, word, b))
                  out.emplace_back(c.word, c.score);
              return out;
          },
          py::arg("model"), py::arg("word"), py::arg("b") = 5,
          "Up to b (candidate, score) transductions, best first.");

    // ----- parsing -----
    m.def("greedy_parse", &parser::greedy_parse, py::arg("model"), py::arg("sentence"),
          "Parse with one model, ignoring language tags.");
    m.def("check_compatible", &strategy::check_compatible, py::arg("hi_model"),
          py::arg("en_model"), "Raise ModelError unless the label inventories match.");
    m.def("parse_monolingual", &strategy::parse_monolingual_baseline, py::arg("hi_model"),
          py::arg("en_model"), py::arg("sentence"),
          "Parse the whole sentence with the matrix language's model.");
    m.def("parse_interpolated",
          [](const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model,
             const conllu::Sentence& s, double lambda_m) {
              strategy::InterpolationConfig cfg;
              cfg.lambda_m = lambda_m;
              return strategy::parse_interpolated(hi_model, en_model, s, cfg);
          },
          py::arg("hi_model"), py::arg("en_model"), py::arg("sentence"),
          py::arg("lambda_m") = 0.75,
          "Parse with per-configuration interpolation of both models.");
    m.def("parse_multilingual", &strategy::parse_multilingual, py::arg("model"),
          py::arg("sentence"), "Parse with one model trained on both languages.");
    m.def("parse_multipass",
          [](const nn::FeedForwardModel& hi_model, const nn::FeedForwardModel& en_model,
             const conllu::Sentence& s, const std::string& mode) {
              return strategy::parse_multipass(hi_model, en_model, s, multipass_mode(mode));
          },
          py::arg("hi_model"), py::arg("en_model"), py::arg("sentence"),
          py::arg("mode") = "fragment-wise",
          "Parse fragments monolingually, then attach them in a second pass.");

    // ----- fragments -----
    m.def("matrix_language",
          [](const conllu::Sentence& s) {
              return std::string(conllu::to_string(strategy::segment_fragments(s).matrix_language));
          },
          py::arg("sentence"), "Majority language of the sentence's hi/en tokens.");
    m.def("fragments",
          [](const conllu::Sentence& s) {
              std::vector<std::tuple<int, int, std::string>> out;
              for (const auto& f : strategy::segment_fragments(s).fragments)
                  out.emplace_back(f.start, f.end, conllu::to_string(f.lang));
              return out;
          },
          py::arg("sentence"),
          "Same-language runs as (start, end, lang) with 1-based inclusive bounds.");
    m.def("stamp_language",
          [](std::vector<conllu::Sentence> corpus, const std::string& lang) {
              auto tag = lang_from(lang);
              if (!tag) throw ValidationError("language tag must be non-empty");
              strategy::stamp_language(corpus, *tag);
              return corpus;
          },
          py::arg("sentences"), py::arg("lang"),
          "Copy of the corpus with every token tagged with the given language.");

    // ----- metrics -----
    py::class_<metrics::AttachmentScores>(m, "AttachmentScores")
        .def_readonly("uas", &metrics::AttachmentScores::uas)
        .def_readonly("las", &metrics::AttachmentScores::las)
        .def_readonly("tokens", &metrics::AttachmentScores::tokens)
        .def("__repr__", [](const metrics::AttachmentScores& a) {
            return "AttachmentScores(uas=" + std::to_string(a.uas) +
                   ", las=" + std::to_string(a.las) + ", tokens=" + std::to_string(a.tokens) + ")";
        });
    m.def("attachment_scores", &metrics::attachment_scores, py::arg("gold"), py::arg("pred"),
          py::arg("ignore_punct") = false);

    py::class_<metrics::LabelScore>(m, "LabelScore")
        .def_readonly("label", &metrics::LabelScore::label)
        .def_readonly("precision", &metrics::LabelScore::precision)
        .def_readonly("recall", &metrics::LabelScore::recall)
        .def_readonly("f1", &metrics::LabelScore::f1)
        .def_readonly("count", &metrics::LabelScore::count);
    py::class_<metrics::LabelReport>(m, "LabelReport")
        .def_readonly("labels", &metrics::LabelReport::labels)
        .def_readonly("accuracy", &metrics::LabelReport::accuracy)
        .def_readonly("total", &metrics::LabelReport::total);
    m.def("label_prf", &metrics::label_prf, py::arg("gold"), py::arg("pred"));

    py::class_<metrics::PosAccuracy>(m, "PosAccuracy")
        .def_readonly("hi", &metrics::PosAccuracy::hi)
        .def_readonly("en", &metrics::PosAccuracy::en)
        .def_readonly("total", &metrics::PosAccuracy::total)
        .def_readonly("hi_tokens", &metrics::PosAccuracy::hi_tokens)
        .def_readonly("en_tokens", &metrics::PosAccuracy::en_tokens)
        .def_readonly("total_tokens", &metrics::PosAccuracy::total_tokens);
    m.def("pos_accuracy", &metrics::pos_accuracy, py::arg("gold"), py::arg("pred"),
          py::arg("all_tokens") = false);
}
