#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "codemix/conllu.hpp"
#include "codemix/embeddings.hpp"
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

namespace {

using namespace codemix;

// Input paths that don't exist relative to the working directory fall back to
// $CODEMIX_DATA_DIR. Nonexistent paths are returned untouched so downstream
// errors name what the user typed.
std::string resolve_data_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (path.empty() || fs::exists(path)) return path;
    const char* base = std::getenv("CODEMIX_DATA_DIR");
    if (base != nullptr && *base != '\0') {
        fs::path joined = fs::path(base) / path;
        if (fs::exists(joined)) return joined.string();
    }
    return path;
}

std::vector<conllu::Sentence> read_treebank(const std::string& path) {
    return conllu::read_conllu_file(resolve_data_path(path));
}

// Training corpus assembly: several treebanks, each optionally stamped with a
// language tag ("keep" leaves the file's own tags in place).
std::vector<conllu::Sentence> read_training_corpus(const std::vector<std::string>& paths,
                                                   const std::vector<std::string>& langs) {
    if (!langs.empty() && langs.size() != paths.size())
        throw ValidationError("--lang must be given once per --train file or not at all");
    std::vector<conllu::Sentence> corpus;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::vector<conllu::Sentence> part = read_treebank(paths[i]);
        if (!langs.empty() && langs[i] != "keep") {
            auto tag = conllu::parse_language_tag(langs[i]);
            if (!tag) throw ValidationError("unknown language tag '" + langs[i] + "'");
            strategy::stamp_language(part, *tag);
        }
        corpus.insert(corpus.end(), part.begin(), part.end());
    }
    return corpus;
}

std::optional<emb::EmbeddingTable> load_pretrained(const std::string& emb_path,
                                                   const std::string& lexicon_path) {
    if (emb_path.empty()) {
        if (!lexicon_path.empty())
            throw ValidationError("--lexicon requires --embeddings");
        return std::nullopt;
    }
    emb::EmbeddingTable table = emb::load_embeddings_file(resolve_data_path(emb_path));
    if (!lexicon_path.empty()) {
        emb::BilingualLexicon lex = emb::load_lexicon_file(resolve_data_path(lexicon_path));
        emb::EmbeddingTable projected = emb::project_lexicon(table, lex);
        for (auto& [word, vec] : projected.entries) table.entries.emplace(word, vec);
    }
    return table;
}

std::vector<std::pair<std::string, std::string>> read_pair_file(const std::string& path) {
    std::string resolved = resolve_data_path(path);
    std::ifstream in(resolved);
    if (!in) throw ParseError("cannot open pair file: " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected two tab-separated columns");
        pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return pairs;
}

std::vector<std::string> read_word_list(const std::string& path) {
    std::string resolved = resolve_data_path(path);
    std::ifstream in(resolved);
    if (!in) throw ParseError("cannot open word list: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') words.push_back(line);
    }
    return words;
}

std::vector<std::vector<std::string>> read_token_lines(const std::string& path) {
    std::string resolved = resolve_data_path(path);
    std::ifstream in(resolved);
    if (!in) throw ParseError("cannot open corpus: " + path);
    std::vector<std::vector<std::string>> corpus;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::vector<std::string> toks;
        std::string tok;
        while (row >> tok) toks.push_back(tok);
        if (!toks.empty()) corpus.push_back(std::move(toks));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Config files
//
// Flat key=value text expanded into --key=value arguments before parsing, so
// the same file works for any subcommand and explicitly given flags win.
// (CLI11's own config support only reaches options of the top-level app.)

std::string trim_ws(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (const std::string& a : args)
        if (a == "--help" || a == "-h") return args; // help outranks config errors

    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream in(resolve_data_path(path));
    if (!in) throw ParseError("cannot open config file: " + path);

    auto given = [&args](const std::string& flag) {
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string entry = trim_ws(line);
        if (entry.empty() || entry[0] == '#') continue;
        std::size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim_ws(entry.substr(0, eq));
        std::string value = trim_ws(entry.substr(eq + 1));
        std::string flag = "--" + key;
        if (!given(flag)) args.push_back(flag + "=" + value);
    }
    return args;
}

void add_config_option(CLI::App* cmd) {
    static std::string sink; // value consumed by expand_config_args before parsing
    cmd->add_option("--config", sink, "Config file (key=value lines; flags override)");
}

// ---------------------------------------------------------------------------
// Shared trainer flags

struct TrainFlags {
    std::vector<std::string> train;
    std::vector<std::string> lang;
    std::string dev;
    std::string dev_lang = "keep";
    std::string output;
    std::string embeddings;
    std::string lexicon;
    double learning_rate = 0.01;
    double l2 = 1e-8;
    double dropout = 0.5;
    int batch = 32;
    int epochs = 20;
    int hidden = 200;
    std::uint64_t seed = 1;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool multi_train) {
    if (multi_train)
        cmd->add_option("--train", f.train, "Training treebank(s), CoNLL-U")->required();
    else
        cmd->add_option("--train", f.train, "Training treebank, CoNLL-U")->required()->expected(1);
    cmd->add_option("--lang", f.lang, "Language stamp per --train file (hi|en|keep)");
    cmd->add_option("--dev", f.dev, "Development treebank for epoch selection");
    cmd->add_option("--dev-lang", f.dev_lang, "Language stamp for --dev (hi|en|keep)");
    cmd->add_option("--output", f.output, "Model output path")->required();
    cmd->add_option("--embeddings", f.embeddings, "Pre-trained word vectors (text format)");
    cmd->add_option("--lexicon", f.lexicon, "Bilingual lexicon TSV; projects extra vectors into the embedding space");
    cmd->add_option("--learning-rate", f.learning_rate, "Adagrad learning rate")->capture_default_str();
    cmd->add_option("--l2", f.l2, "L2 regularization strength")->capture_default_str();
    cmd->add_option("--dropout", f.dropout, "Hidden-layer dropout probability")->capture_default_str();
    cmd->add_option("--batch", f.batch, "Mini-batch size")->capture_default_str();
    cmd->add_option("--epochs", f.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--hidden", f.hidden, "Hidden layer width")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    add_config_option(cmd);
}

nn::TrainerConfig trainer_config(const TrainFlags& f) {
    nn::TrainerConfig cfg;
    cfg.learning_rate = f.learning_rate;
    cfg.l2_lambda = f.l2;
    cfg.dropout_prob = f.dropout;
    cfg.batch_size = f.batch;
    cfg.epochs = f.epochs;
    cfg.seed = f.seed;
    return cfg;
}

std::vector<conllu::Sentence> read_dev(const TrainFlags& f) {
    if (f.dev.empty()) return {};
    std::vector<conllu::Sentence> dev = read_treebank(f.dev);
    if (f.dev_lang != "keep") {
        auto tag = conllu::parse_language_tag(f.dev_lang);
        if (!tag) throw ValidationError("unknown language tag '" + f.dev_lang + "'");
        strategy::stamp_language(dev, *tag);
    }
    return dev;
}

// Runs nn::train with per-epoch dev evaluation; restores the best-on-dev
// snapshot into `model`. `dev_metric` returns (score, printable report).
void train_with_selection(nn::FeedForwardModel& model, const std::vector<nn::Example>& examples,
                          const nn::TrainerConfig& cfg, bool have_dev,
                          const std::function<std::pair<double, std::string>(
                              const nn::FeedForwardModel&)>& dev_metric) {
    nn::FeedForwardModel best;
    double best_score = -1.0;
    int best_epoch = 0;
    nn::train(model, examples, cfg,
              [&](int epoch, double loss, const nn::FeedForwardModel& snapshot) {
                  std::string line = "epoch " + std::to_string(epoch) + "/" +
                                     std::to_string(cfg.epochs) + "  loss " + std::to_string(loss);
                  if (have_dev) {
                      auto [score, report] = dev_metric(snapshot);
                      line += "  " + report;
                      if (score > best_score) {
                          best_score = score;
                          best = snapshot;
                          best_epoch = epoch;
                          line += "  *";
                      }
                  }
                  std::cout << line << "\n";
              });
    if (have_dev && best_epoch > 0) {
        std::cout << "selected epoch " << best_epoch << "\n";
        model = std::move(best);
    }
}

// ---------------------------------------------------------------------------
// train-lid

int run_train_lid(const TrainFlags& f) {
    std::vector<conllu::Sentence> corpus = read_training_corpus(f.train, f.lang);
    std::vector<nn::Example> examples = lid::build_lid_examples(corpus);
    std::optional<emb::EmbeddingTable> pretrained = load_pretrained(f.embeddings, f.lexicon);

    lid::LidModelConfig mc;
    mc.hidden_size = f.hidden;
    mc.pretrained = pretrained ? &*pretrained : nullptr;
    mc.seed = f.seed;
    nn::FeedForwardModel model = lid::build_lid_model(corpus, mc);

    std::vector<conllu::Sentence> dev = read_dev(f);
    train_with_selection(model, examples, trainer_config(f), !dev.empty(),
                         [&dev](const nn::FeedForwardModel& m) {
                             int ok = 0, total = 0;
                             for (const auto& gold_sentence : dev) {
                                 conllu::Sentence pred = gold_sentence;
                                 lid::tag_languages(m, pred);
                                 for (int i = 0; i < pred.size(); ++i) {
                                     if (!gold_sentence.tokens[i].lang)
                                         throw ValidationError("dev token without Lang tag in sentence " +
                                                               gold_sentence.sent_id);
                                     ++total;
                                     ok += pred.tokens[i].lang == gold_sentence.tokens[i].lang;
                                 }
                             }
                             double acc = total > 0 ? 100.0 * ok / total : 0.0;
                             char buf[64];
                             std::snprintf(buf, sizeof buf, "dev acc %.2f", acc);
                             return std::make_pair(acc, std::string(buf));
                         });
    nn::save_model_file(model, f.output);
    std::cout << "wrote " << f.output << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-pos

int run_train_pos(const TrainFlags& f, bool multilingual) {
    std::vector<conllu::Sentence> corpus = read_training_corpus(f.train, f.lang);
    std::vector<nn::Example> examples = pos::build_tagger_examples(corpus, multilingual);
    std::optional<emb::EmbeddingTable> pretrained = load_pretrained(f.embeddings, f.lexicon);

    pos::TaggerModelConfig mc;
    mc.hidden_size = f.hidden;
    mc.multilingual = multilingual;
    mc.pretrained = pretrained ? &*pretrained : nullptr;
    mc.seed = f.seed;
    nn::FeedForwardModel model = pos::build_tagger_model(corpus, mc);

    std::vector<conllu::Sentence> dev = read_dev(f);
    train_with_selection(model, examples, trainer_config(f), !dev.empty(),
                         [&dev, multilingual](const nn::FeedForwardModel& m) {
                             int ok = 0, total = 0;
                             for (const auto& gold_sentence : dev) {
                                 conllu::Sentence pred = gold_sentence;
                                 if (multilingual) {
                                     auto seg = strategy::segment_fragments(pred);
                                     pos::tag_pos_multilingual(m, pred, seg);
                                 } else {
                                     pos::tag_sentence(m, pred);
                                 }
                                 for (int i = 0; i < pred.size(); ++i) {
                                     ++total;
                                     ok += pred.tokens[i].upos == gold_sentence.tokens[i].upos;
                                 }
                             }
                             double acc = total > 0 ? 100.0 * ok / total : 0.0;
                             char buf[64];
                             std::snprintf(buf, sizeof buf, "dev acc %.2f", acc);
                             return std::make_pair(acc, std::string(buf));
                         });
    nn::save_model_file(model, f.output);
    std::cout << "wrote " << f.output << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-parser

int run_train_parser(const TrainFlags& f, bool multilingual) {
    std::vector<conllu::Sentence> corpus = read_training_corpus(f.train, f.lang);
    parser::TrainingData data = parser::build_parser_examples(corpus, multilingual);
    if (data.skipped_nonprojective > 0)
        std::cout << "skipped " << data.skipped_nonprojective << " non-projective sentence(s)\n";
    std::optional<emb::EmbeddingTable> pretrained = load_pretrained(f.embeddings, f.lexicon);

    parser::ParserModelConfig mc;
    mc.hidden_size = f.hidden;
    mc.multilingual = multilingual;
    mc.pretrained = pretrained ? &*pretrained : nullptr;
    mc.seed = f.seed;
    nn::FeedForwardModel model = parser::build_parser_model(corpus, mc);

    std::vector<conllu::Sentence> dev = read_dev(f);
    train_with_selection(model, data.examples, trainer_config(f), !dev.empty(),
                         [&dev, multilingual](const nn::FeedForwardModel& m) {
                             std::vector<conllu::Sentence> pred;
                             pred.reserve(dev.size());
                             for (const auto& s : dev)
                                 pred.push_back(multilingual ? strategy::parse_multilingual(m, s)
                                                             : parser::greedy_parse(m, s));
                             metrics::AttachmentScores a = metrics::attachment_scores(dev, pred);
                             char buf[64];
                             std::snprintf(buf, sizeof buf, "dev UAS %.2f LAS %.2f", a.uas, a.las);
                             return std::make_pair(a.las, std::string(buf));
                         });
    nn::save_model_file(model, f.output);
    std::cout << "wrote " << f.output << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-translit

struct TranslitFlags {
    std::string pairs;
    std::string wordlist;
    std::string confusion;
    std::string dev;
    std::string output;
    double p_drop = 0.5;
    double p_sub = 0.1;
    int epochs = 10;
    int beam = 5;
    std::uint64_t seed = 1;
};

int run_train_translit(const TranslitFlags& f) {
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!f.pairs.empty()) pairs = read_pair_file(f.pairs);
    if (!f.wordlist.empty()) {
        std::vector<std::string> words = read_word_list(f.wordlist);
        std::vector<std::pair<std::string, std::string>> confusion;
        if (!f.confusion.empty()) confusion = read_pair_file(f.confusion);
        translit::NoiseConfig noise;
        noise.p_drop = f.p_drop;
        noise.p_sub = f.p_sub;
        auto noisy = translit::generate_noisy_pairs(words, confusion, f.seed, noise);
        pairs.insert(pairs.end(), noisy.begin(), noisy.end());
    }
    if (pairs.empty()) throw ValidationError("need --pairs and/or --wordlist training data");

    std::vector<std::pair<std::string, std::string>> dev;
    if (!f.dev.empty()) dev = read_pair_file(f.dev);

    auto dev_accuracy = [&dev](const translit::TransducerModel& m) {
        int ok = 0;
        for (const auto& [src, tgt] : dev) {
            auto kbest = translit::kbest_transduce(m, src, 1);
            ok += !kbest.empty() && kbest.front().word == tgt;
        }
        return dev.empty() ? 0.0 : 100.0 * ok / static_cast<double>(dev.size());
    };

    translit::PerceptronConfig cfg;
    cfg.epochs = f.epochs;
    cfg.beam = f.beam;
    cfg.seed = f.seed;

    translit::TransducerModel best;
    double best_score = -1.0;
    int best_epoch = 0;
    translit::TransducerModel model = translit::train_transducer(
        pairs, cfg, [&](int epoch, int updates, const translit::TransducerModel& snapshot) {
            std::string line = "epoch " + std::to_string(epoch) + "/" + std::to_string(cfg.epochs) +
                               "  updates " + std::to_string(updates);
            if (!dev.empty()) {
                double acc = dev_accuracy(snapshot);
                char buf[64];
                std::snprintf(buf, sizeof buf, "  dev acc %.2f", acc);
                line += buf;
                if (acc > best_score) {
                    best_score = acc;
                    best = snapshot;
                    best_epoch = epoch;
                    line += "  *";
                }
            }
            std::cout << line << "\n";
        });
    if (!dev.empty() && best_epoch > 0) {
        std::cout << "selected epoch " << best_epoch << "\n";
        model = std::move(best);
    }
    translit::save_transducer_file(model, f.output);
    std::cout << "wrote " << f.output << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-lm

int run_train_lm(const std::string& corpus_path, const std::string& dev_path,
                 const std::string& output) {
    std::vector<std::vector<std::string>> corpus = read_token_lines(corpus_path);
    kn::TrigramLM lm = kn::TrigramLM::train(corpus);
    std::cout << "trained on " << corpus.size() << " sentences, vocabulary "
              << lm.predictable_vocab().size() << "\n";
    if (!dev_path.empty()) {
        std::vector<std::vector<std::string>> dev = read_token_lines(dev_path);
        double ll = 0.0;
        std::size_t words = 0;
        for (const auto& sent : dev) {
            std::vector<std::string> hist = {kn::kBos};
            for (std::size_t i = 0; i <= sent.size(); ++i) {
                const std::string& w = i < sent.size() ? sent[i] : kn::kEos;
                ll += lm.log_prob(hist, w);
                hist.push_back(w);
                ++words;
            }
        }
        if (words > 0) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "dev perplexity %.3f", std::exp(-ll / words));
            std::cout << buf << "\n";
        }
    }
    lm.save_arpa_file(output);
    kn::TrigramLM::load_arpa_file(output); // round-trip sanity
    std::cout << "wrote " << output << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineFlags {
    std::string input;
    std::string output = "-";
    bool raw = false;
    std::string strategy = "interpolated";
    double lambda = 0.75;
    std::string lid_model;
    bool gold_lid = false;
    std::string hi_parser, en_parser, parser_model;
    std::string pos_mode = "mono";
    std::string hi_pos, en_pos, pos_model;
    bool gold_pos = false;
    bool skip_normalize = false;
    std::string hi_translit, en_translit, hi_lm, en_lm;
    int beam = 5;
    int threads = 1;
};

std::vector<conllu::Sentence> read_pipeline_input(const PipelineFlags& f) {
    if (!f.raw) return read_treebank(f.input);
    std::vector<conllu::Sentence> sentences;
    for (auto& toks : read_token_lines(f.input)) {
        conllu::Sentence s;
        s.sent_id = std::to_string(sentences.size() + 1);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            conllu::AnnotatedToken t;
            t.index = static_cast<int>(i) + 1;
            t.form = std::move(toks[i]);
            s.tokens.push_back(std::move(t));
        }
        sentences.push_back(std::move(s));
    }
    return sentences;
}

int run_pipeline(const PipelineFlags& f) {
    // Load everything up front so incompatibilities surface before processing.
    std::optional<nn::FeedForwardModel> lid_model;
    if (!f.gold_lid) {
        if (f.lid_model.empty()) throw ValidationError("need --lid-model unless --gold-lid");
        lid_model = nn::load_model_file(resolve_data_path(f.lid_model));
    }

    std::optional<norm::Normalizer> normalizer;
    if (!f.skip_normalize) {
        if (f.hi_translit.empty() || f.en_translit.empty() || f.hi_lm.empty() || f.en_lm.empty())
            throw ValidationError(
                "normalization needs --hi-translit, --en-translit, --hi-lm and --en-lm "
                "(or pass --skip-normalize)");
        norm::Normalizer n;
        n.hi_transducer = translit::load_transducer_file(resolve_data_path(f.hi_translit));
        n.en_transducer = translit::load_transducer_file(resolve_data_path(f.en_translit));
        n.hi_lm = kn::TrigramLM::load_arpa_file(resolve_data_path(f.hi_lm));
        n.en_lm = kn::TrigramLM::load_arpa_file(resolve_data_path(f.en_lm));
        n.beam = f.beam;
        normalizer = std::move(n);
    }

    std::optional<nn::FeedForwardModel> hi_pos, en_pos, multi_pos;
    if (!f.gold_pos) {
        if (f.pos_mode == "mono") {
            if (f.hi_pos.empty() || f.en_pos.empty())
                throw ValidationError("--pos-mode mono needs --hi-pos and --en-pos");
            hi_pos = nn::load_model_file(resolve_data_path(f.hi_pos));
            en_pos = nn::load_model_file(resolve_data_path(f.en_pos));
        } else if (f.pos_mode == "multi") {
            if (f.pos_model.empty()) throw ValidationError("--pos-mode multi needs --pos");
            multi_pos = nn::load_model_file(resolve_data_path(f.pos_model));
        } else {
            throw ValidationError("--pos-mode must be mono or multi");
        }
    }

    std::optional<nn::FeedForwardModel> hi_parser, en_parser, multi_parser;
    if (f.strategy == "multilingual") {
        if (f.parser_model.empty()) throw ValidationError("--strategy multilingual needs --parser");
        multi_parser = nn::load_model_file(resolve_data_path(f.parser_model));
    } else if (f.strategy == "monolingual" || f.strategy == "interpolated" ||
               f.strategy == "multipass-f" || f.strategy == "multipass-s") {
        if (f.hi_parser.empty() || f.en_parser.empty())
            throw ValidationError("--strategy " + f.strategy + " needs --hi-parser and --en-parser");
        hi_parser = nn::load_model_file(resolve_data_path(f.hi_parser));
        en_parser = nn::load_model_file(resolve_data_path(f.en_parser));
        if (f.strategy != "monolingual") strategy::check_compatible(*hi_parser, *en_parser);
    } else {
        throw ValidationError("unknown strategy '" + f.strategy + "'");
    }

    strategy::InterpolationConfig interp;
    interp.lambda_m = f.lambda;

    std::vector<conllu::Sentence> sentences = read_pipeline_input(f);

    auto process = [&](conllu::Sentence& s) {
        if (!f.gold_lid) lid::tag_languages(*lid_model, s);
        if (normalizer) normalizer->normalize(s);
        if (!f.gold_pos) {
            strategy::FragmentSegmentation seg = strategy::segment_fragments(s);
            if (hi_pos)
                pos::tag_pos_monolingual(*hi_pos, *en_pos, s, seg);
            else
                pos::tag_pos_multilingual(*multi_pos, s, seg);
        }
        if (f.strategy == "monolingual")
            s = strategy::parse_monolingual_baseline(*hi_parser, *en_parser, s);
        else if (f.strategy == "interpolated")
            s = strategy::parse_interpolated(*hi_parser, *en_parser, s, interp);
        else if (f.strategy == "multilingual")
            s = strategy::parse_multilingual(*multi_parser, s);
        else if (f.strategy == "multipass-f")
            s = strategy::parse_multipass(*hi_parser, *en_parser, s,
                                          strategy::MultipassMode::fragment_wise);
        else
            s = strategy::parse_multipass(*hi_parser, *en_parser, s,
                                          strategy::MultipassMode::subordinate_first);
    };

    int threads = std::max(1, f.threads);
    if (threads == 1 || sentences.size() < 2) {
        for (auto& s : sentences) process(s);
    } else {
        // Sentence-level parallelism; output order stays the input order
        // because each worker writes only its own slots.
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> failures(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = cursor++; i < sentences.size(); i = cursor++)
                        process(sentences[i]);
                } catch (...) {
                    failures[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& failure : failures)
            if (failure) std::rethrow_exception(failure);
    }

    if (f.output == "-")
        conllu::write_conllu(sentences, std::cout);
    else
        conllu::write_conllu_file(sentences, f.output);
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateFlags {
    std::string gold;
    std::string pred;
    std::string metric = "attachment";
    bool ignore_punct = false;
    bool all_tokens = false;
    std::string format = "text";
};

std::vector<std::string> lang_tags_of(const std::vector<conllu::Sentence>& corpus,
                                      const char* which) {
    std::vector<std::string> tags;
    for (const auto& s : corpus)
        for (const auto& t : s.tokens) {
            if (!t.lang)
                throw ValidationError(std::string(which) + " token without Lang tag in sentence " +
                                      (s.sent_id.empty() ? "?" : s.sent_id));
            tags.push_back(conllu::to_string(*t.lang));
        }
    return tags;
}

int run_evaluate(const EvaluateFlags& f) {
    bool kv = f.format == "kv";
    if (!kv && f.format != "text") throw ValidationError("--format must be text or kv");
    std::vector<conllu::Sentence> gold = read_treebank(f.gold);

    if (f.metric == "mixing") {
        double ratio = conllu::mixing_ratio(gold);
        if (kv)
            std::printf("mixing_ratio=%.6f\n", ratio);
        else
            std::printf("mixing ratio = %.4f over %zu sentences\n", ratio, gold.size());
        return 0;
    }

    if (f.pred.empty()) throw ValidationError("--pred is required for metric " + f.metric);
    std::vector<conllu::Sentence> pred = read_treebank(f.pred);

    if (f.metric == "attachment") {
        metrics::AttachmentScores a = metrics::attachment_scores(gold, pred, f.ignore_punct);
        if (kv)
            std::printf("uas=%.6f\nlas=%.6f\ntokens=%d\n", a.uas, a.las, a.tokens);
        else
            std::printf("UAS = %.2f\nLAS = %.2f\ntokens = %d\n", a.uas, a.las, a.tokens);
    } else if (f.metric == "pos") {
        metrics::PosAccuracy a = metrics::pos_accuracy(gold, pred, f.all_tokens);
        if (kv) {
            std::printf("pos_hi=%.6f\npos_en=%.6f\npos_total=%.6f\ntokens=%d\n", a.hi, a.en,
                        a.total, a.total_tokens);
        } else {
            std::printf("%-8s %10s %8s\n", "language", "accuracy", "tokens");
            std::printf("%-8s %10.4f %8d\n", "hi", a.hi, a.hi_tokens);
            std::printf("%-8s %10.4f %8d\n", "en", a.en, a.en_tokens);
            std::printf("%-8s %10.4f %8d\n", "total", a.total, a.total_tokens);
        }
    } else if (f.metric == "lid") {
        metrics::LabelReport r =
            metrics::label_prf(lang_tags_of(gold, "gold"), lang_tags_of(pred, "predicted"));
        if (kv) {
            for (const auto& s : r.labels)
                std::printf("%s_precision=%.6f\n%s_recall=%.6f\n%s_f1=%.6f\n%s_count=%d\n",
                            s.label.c_str(), s.precision, s.label.c_str(), s.recall,
                            s.label.c_str(), s.f1, s.label.c_str(), s.count);
            std::printf("accuracy=%.6f\n", r.accuracy);
        } else {
            std::printf("%-8s %10s %8s %9s %7s\n", "label", "precision", "recall", "f1", "count");
            for (const auto& s : r.labels)
                std::printf("%-8s %10.4f %8.4f %9.4f %7d\n", s.label.c_str(), s.precision, s.recall,
                            s.f1, s.count);
            std::printf("accuracy = %.4f over %d tokens\n", r.accuracy, r.total);
        }
    } else {
        throw ValidationError("unknown metric '" + f.metric + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dependency parsing toolkit for Hindi-English code-mixed text"};
    app.require_subcommand(1);

    TrainFlags lid_flags;
    CLI::App* lid_cmd = app.add_subcommand("train-lid", "Train the token language identifier");
    add_train_flags(lid_cmd, lid_flags, true);

    TrainFlags pos_flags;
    bool pos_multi = false;
    CLI::App* pos_cmd = app.add_subcommand("train-pos", "Train a POS tagger");
    add_train_flags(pos_cmd, pos_flags, true);
    pos_cmd->add_flag("--multilingual", pos_multi, "Train one tagger with language-tag features");

    TrainFlags parser_flags;
    bool parser_multi = false;
    CLI::App* parser_cmd = app.add_subcommand("train-parser", "Train an arc-eager neural parser");
    add_train_flags(parser_cmd, parser_flags, true);
    parser_cmd->add_flag("--multilingual", parser_multi,
                         "Train one parser with language-tag features");

    TranslitFlags translit_flags;
    CLI::App* translit_cmd =
        app.add_subcommand("train-translit", "Train a character transducer (perceptron)");
    translit_cmd->add_option("--pairs", translit_flags.pairs, "TSV of source<TAB>target words");
    translit_cmd->add_option("--wordlist", translit_flags.wordlist,
                             "Clean word list; trains on synthetic noisy variants");
    translit_cmd->add_option("--confusion", translit_flags.confusion,
                             "TSV of character confusions for --wordlist noise");
    translit_cmd->add_option("--p-drop", translit_flags.p_drop, "Vowel drop probability")
        ->capture_default_str();
    translit_cmd->add_option("--p-sub", translit_flags.p_sub, "Confusion substitution probability")
        ->capture_default_str();
    translit_cmd->add_option("--dev", translit_flags.dev, "Dev TSV for epoch selection");
    translit_cmd->add_option("--output", translit_flags.output, "Model output path")->required();
    translit_cmd->add_option("--epochs", translit_flags.epochs, "Perceptron epochs")
        ->capture_default_str();
    translit_cmd->add_option("--beam", translit_flags.beam, "Decoding beam width")
        ->capture_default_str();
    translit_cmd->add_option("--seed", translit_flags.seed, "Random seed")->capture_default_str();
    add_config_option(translit_cmd);

    std::string lm_corpus, lm_dev, lm_output;
    CLI::App* lm_cmd = app.add_subcommand("train-lm", "Train a Kneser-Ney trigram language model");
    lm_cmd->add_option("--corpus", lm_corpus, "Tokenized text, one sentence per line")->required();
    lm_cmd->add_option("--dev", lm_dev, "Held-out text for perplexity");
    lm_cmd->add_option("--output", lm_output, "ARPA output path")->required();
    add_config_option(lm_cmd);

    PipelineFlags pipe_flags;
    CLI::App* pipe_cmd =
        app.add_subcommand("pipeline", "LID -> normalize -> POS -> parse, CoNLL-U out");
    pipe_cmd->add_option("--input", pipe_flags.input, "Input file")->required();
    pipe_cmd->add_option("--output", pipe_flags.output, "Output CoNLL-U ('-' = stdout)")
        ->capture_default_str();
    pipe_cmd->add_flag("--raw", pipe_flags.raw, "Input is plain text, one sentence per line");
    pipe_cmd->add_option("--strategy", pipe_flags.strategy,
                         "monolingual|interpolated|multilingual|multipass-f|multipass-s")
        ->capture_default_str();
    pipe_cmd->add_option("--lambda", pipe_flags.lambda, "Matrix-model interpolation weight")
        ->capture_default_str();
    pipe_cmd->add_option("--lid-model", pipe_flags.lid_model, "Language identifier model");
    pipe_cmd->add_flag("--gold-lid", pipe_flags.gold_lid, "Trust the input's Lang tags");
    pipe_cmd->add_option("--hi-parser", pipe_flags.hi_parser, "Hindi parser model");
    pipe_cmd->add_option("--en-parser", pipe_flags.en_parser, "English parser model");
    pipe_cmd->add_option("--parser", pipe_flags.parser_model, "Multilingual parser model");
    pipe_cmd->add_option("--pos-mode", pipe_flags.pos_mode, "mono|multi")->capture_default_str();
    pipe_cmd->add_option("--hi-pos", pipe_flags.hi_pos, "Hindi POS model");
    pipe_cmd->add_option("--en-pos", pipe_flags.en_pos, "English POS model");
    pipe_cmd->add_option("--pos", pipe_flags.pos_model, "Multilingual POS model");
    pipe_cmd->add_flag("--gold-pos", pipe_flags.gold_pos, "Trust the input's UPOS column");
    pipe_cmd->add_flag("--skip-normalize", pipe_flags.skip_normalize, "Skip normalization");
    pipe_cmd->add_option("--hi-translit", pipe_flags.hi_translit, "Hindi back-transliteration model");
    pipe_cmd->add_option("--en-translit", pipe_flags.en_translit, "English normalization model");
    pipe_cmd->add_option("--hi-lm", pipe_flags.hi_lm, "Hindi ARPA language model");
    pipe_cmd->add_option("--en-lm", pipe_flags.en_lm, "English ARPA language model");
    pipe_cmd->add_option("--beam", pipe_flags.beam, "Normalization candidates per token")
        ->capture_default_str();
    pipe_cmd->add_option("--threads", pipe_flags.threads, "Worker threads over sentences")
        ->capture_default_str();
    add_config_option(pipe_cmd);

    EvaluateFlags eval_flags;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold");
    eval_cmd->add_option("--gold", eval_flags.gold, "Gold CoNLL-U")->required();
    eval_cmd->add_option("--pred", eval_flags.pred, "Predicted CoNLL-U");
    eval_cmd->add_option("--metric", eval_flags.metric, "attachment|pos|lid|mixing")
        ->capture_default_str();
    eval_cmd->add_flag("--ignore-punct", eval_flags.ignore_punct,
                       "Skip tokens whose gold UPOS is PUNCT");
    eval_cmd->add_flag("--all-tokens", eval_flags.all_tokens,
                       "POS totals include ne/acro/univ tokens");
    eval_cmd->add_option("--format", eval_flags.format, "text|kv")->capture_default_str();
    add_config_option(eval_cmd);

    try {
        app.name(argv[0]);
        std::vector<std::string> args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end()); // CLI11 consumes args back to front
        app.parse(std::move(args));
        if (*lid_cmd) return run_train_lid(lid_flags);
        if (*pos_cmd) return run_train_pos(pos_flags, pos_multi);
        if (*parser_cmd) return run_train_parser(parser_flags, parser_multi);
        if (*translit_cmd) return run_train_translit(translit_flags);
        if (*lm_cmd) return run_train_lm(lm_corpus, lm_dev, lm_output);
        if (*pipe_cmd) return run_pipeline(pipe_flags);
        if (*eval_cmd) return run_evaluate(eval_flags);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
