#include "codemix/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "codemix/error.hpp"
#include "codemix/rng.hpp"

namespace codemix::nn {

int FeatureTable::row(const std::string& value) const {
    auto it = row_of.find(value);
    if (it != row_of.end()) return it->second;
    if (fallback_row >= 0) return fallback_row;
    throw ValidationError("table '" + name + "' has no row for '" + value + "' and no " + kUnknown);
}

void FeatureTable::rebuild_index() {
    row_of.clear();
    for (std::size_t i = 0; i < vocab.size(); ++i) row_of[vocab[i]] = static_cast<int>(i);
    auto it = row_of.find(kUnknown);
    fallback_row = it == row_of.end() ? -1 : it->second;
}

int FeedForwardModel::input_width() const {
    int w = 0;
    for (const auto& slot : slots) w += tables[static_cast<std::size_t>(slot.table)].dim;
    return w;
}

int FeedForwardModel::table_id(const std::string& name) const {
    for (std::size_t i = 0; i < tables.size(); ++i)
        if (tables[i].name == name) return static_cast<int>(i);
    throw ValidationError("model has no feature table '" + name + "'");
}

void FeedForwardModel::rebuild_indexes() {
    for (auto& t : tables) t.rebuild_index();
    label_index.clear();
    for (std::size_t i = 0; i < labels.size(); ++i) label_index[labels[i]] = static_cast<int>(i);
}

TableSpec language_table_spec() {
    TableSpec spec;
    spec.name = "lang";
    spec.dim = 2;
    spec.trainable = false;
    spec.vocab = {kNull, "hi", "en"};
    spec.fixed_rows[kNull] = Eigen::Vector2d::Zero();
    spec.fixed_rows["hi"] = emb::language_tag_vector(conllu::LanguageTag::hi);
    spec.fixed_rows["en"] = emb::language_tag_vector(conllu::LanguageTag::en);
    return spec;
}

FeedForwardModel build_model(const std::string& task, const std::vector<TableSpec>& tables,
                             const std::vector<std::pair<std::string, std::string>>& slots,
                             const std::vector<std::string>& labels, int hidden_size,
                             std::uint64_t seed) {
    if (labels.empty()) throw ValidationError("model needs at least one class label");
    if (hidden_size < 1) throw ValidationError("hidden size must be >= 1");
    FeedForwardModel m;
    m.task = task;
    m.hidden_size = hidden_size;
    m.labels = labels;
    Rng rng(seed);
    for (const auto& spec : tables) {
        if (spec.dim < 1) throw ValidationError("table '" + spec.name + "' has dimension < 1");
        FeatureTable t;
        t.name = spec.name;
        t.dim = spec.dim;
        t.trainable = spec.trainable;
        t.vocab = spec.vocab;
        t.weights.resize(static_cast<Eigen::Index>(t.vocab.size()), t.dim);
        for (std::size_t r = 0; r < t.vocab.size(); ++r) {
            const std::string& word = t.vocab[r];
            auto fixed = spec.fixed_rows.find(word);
            if (fixed != spec.fixed_rows.end()) {
                t.weights.row(static_cast<Eigen::Index>(r)) = fixed->second.transpose();
                continue;
            }
            if (spec.pretrained) {
                if (spec.pretrained->dimension != spec.dim)
                    throw ValidationError("pretrained dimension " + std::to_string(spec.pretrained->dimension) +
                                          " != table '" + spec.name + "' dimension " + std::to_string(spec.dim));
                if (word == kUnknown) {
                    t.weights.row(static_cast<Eigen::Index>(r)) = spec.pretrained->oov_vector.transpose();
                    continue;
                }
                auto it = spec.pretrained->entries.find(word);
                if (it != spec.pretrained->entries.end()) {
                    t.weights.row(static_cast<Eigen::Index>(r)) = it->second.transpose();
                    continue;
                }
            }
            for (int c = 0; c < t.dim; ++c) t.weights(static_cast<Eigen::Index>(r), c) = rng.uniform(-0.25, 0.25);
        }
        m.tables.push_back(std::move(t));
    }
    m.rebuild_indexes();
    for (const auto& [slot_name, table_name] : slots)
        m.slots.push_back({slot_name, m.table_id(table_name)});
    const int width = m.input_width();
    const int classes = m.num_classes();
    auto glorot = [&rng](Eigen::MatrixXd& w, int fan_out, int fan_in) {
        w.resize(fan_out, fan_in);
        double r = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-r, r);
    };
    glorot(m.w1, hidden_size, width);
    m.b1 = Eigen::VectorXd::Zero(hidden_size);
    glorot(m.w2, classes, hidden_size);
    m.b2 = Eigen::VectorXd::Zero(classes);
    return m;
}

namespace {

std::vector<int> compile_rows(const FeedForwardModel& m, const std::vector<std::string>& values) {
    if (values.size() != m.slots.size()) {
        std::size_t at = std::min(values.size(), m.slots.size() - 1);
        if (values.size() < m.slots.size())
            throw ValidationError("missing value for slot '" + m.slots[values.size()].name + "'");
        throw ValidationError("got " + std::to_string(values.size()) + " values for " +
                              std::to_string(m.slots.size()) + " slots (extra after '" +
                              m.slots[at].name + "')");
    }
    std::vector<int> rows(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        rows[i] = m.tables[static_cast<std::size_t>(m.slots[i].table)].row(values[i]);
    return rows;
}

Eigen::VectorXd input_vector(const FeedForwardModel& m, const std::vector<int>& rows) {
    Eigen::VectorXd x(m.input_width());
    int off = 0;
    for (std::size_t i = 0; i < m.slots.size(); ++i) {
        const auto& t = m.tables[static_cast<std::size_t>(m.slots[i].table)];
        x.segment(off, t.dim) = t.weights.row(rows[i]).transpose();
        off += t.dim;
    }
    return x;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

// Cross-entropy loss for one example; gradient contributions are added
// unscaled into `out`. `dropout_mask`, when given, multiplies the hidden
// activations (inverted dropout: entries are 0 or 1/keep).
double example_backprop(const FeedForwardModel& m, const std::vector<int>& rows, int gold,
                        const Eigen::VectorXd* dropout_mask, Gradients& out) {
    Eigen::VectorXd x = input_vector(m, rows);
    Eigen::VectorXd z1 = m.w1 * x + m.b1;
    Eigen::VectorXd h = z1.cwiseMax(0.0);
    if (dropout_mask) h = h.cwiseProduct(*dropout_mask);
    Eigen::VectorXd z2 = m.w2 * h + m.b2;
    double zmax = z2.maxCoeff();
    double lse = zmax + std::log((z2.array() - zmax).exp().sum());
    double loss = lse - z2[gold];

    Eigen::VectorXd delta2 = (z2.array() - lse).exp().matrix(); // == softmax(z2)
    delta2[gold] -= 1.0;
    out.w2.noalias() += delta2 * h.transpose();
    out.b2 += delta2;
    Eigen::VectorXd dh = m.w2.transpose() * delta2;
    if (dropout_mask) dh = dh.cwiseProduct(*dropout_mask);
    Eigen::VectorXd delta1 = (z1.array() > 0.0).select(dh, 0.0);
    out.w1.noalias() += delta1 * x.transpose();
    out.b1 += delta1;
    Eigen::VectorXd dx = m.w1.transpose() * delta1;
    int off = 0;
    for (std::size_t i = 0; i < m.slots.size(); ++i) {
        const auto& t = m.tables[static_cast<std::size_t>(m.slots[i].table)];
        if (t.trainable)
            out.tables[static_cast<std::size_t>(m.slots[i].table)].row(rows[i]) +=
                dx.segment(off, t.dim).transpose();
        off += t.dim;
    }
    return loss;
}

} // namespace

Eigen::VectorXd forward(const FeedForwardModel& m, const std::vector<std::string>& values) {
    Eigen::VectorXd x = input_vector(m, compile_rows(m, values));
    Eigen::VectorXd h = (m.w1 * x + m.b1).cwiseMax(0.0);
    return softmax(m.w2 * h + m.b2);
}

int predict(const FeedForwardModel& m, const std::vector<std::string>& values) {
    Eigen::VectorXd p = forward(m, values);
    int best = 0;
    for (int k = 1; k < p.size(); ++k)
        if (p[k] > p[best]) best = k;
    return best;
}

Gradients Gradients::zeros_like(const FeedForwardModel& m) {
    Gradients g;
    g.w1 = Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols());
    g.b1 = Eigen::VectorXd::Zero(m.b1.size());
    g.w2 = Eigen::MatrixXd::Zero(m.w2.rows(), m.w2.cols());
    g.b2 = Eigen::VectorXd::Zero(m.b2.size());
    g.tables.resize(m.tables.size());
    for (std::size_t i = 0; i < m.tables.size(); ++i)
        if (m.tables[i].trainable)
            g.tables[i] = Eigen::MatrixXd::Zero(m.tables[i].weights.rows(), m.tables[i].weights.cols());
    return g;
}

void Gradients::set_zero() {
    w1.setZero();
    b1.setZero();
    w2.setZero();
    b2.setZero();
    for (auto& t : tables)
        if (t.size() > 0) t.setZero();
}

namespace {

int gold_index(const FeedForwardModel& m, const std::string& gold) {
    auto it = m.label_index.find(gold);
    if (it == m.label_index.end())
        throw ValidationError("gold label '" + gold + "' is not in the model's class labels");
    return it->second;
}

double add_l2(const FeedForwardModel& m, double lambda, Gradients& g) {
    if (lambda == 0.0) return 0.0;
    double sq = m.w1.squaredNorm() + m.b1.squaredNorm() + m.w2.squaredNorm() + m.b2.squaredNorm();
    g.w1 += lambda * m.w1;
    g.b1 += lambda * m.b1;
    g.w2 += lambda * m.w2;
    g.b2 += lambda * m.b2;
    for (std::size_t i = 0; i < m.tables.size(); ++i) {
        if (!m.tables[i].trainable) continue;
        sq += m.tables[i].weights.squaredNorm();
        g.tables[i] += lambda * m.tables[i].weights;
    }
    return 0.5 * lambda * sq;
}

void scale(Gradients& g, double f) {
    g.w1 *= f;
    g.b1 *= f;
    g.w2 *= f;
    g.b2 *= f;
    for (auto& t : g.tables)
        if (t.size() > 0) t *= f;
}

} // namespace

LossAndGradients loss_and_gradients(const FeedForwardModel& m, const std::vector<Example>& batch,
                                    double l2_lambda) {
    if (batch.empty()) throw ValidationError("loss over an empty batch is undefined");
    LossAndGradients out;
    out.grads = Gradients::zeros_like(m);
    for (const auto& ex : batch)
        out.loss += example_backprop(m, compile_rows(m, ex.values), gold_index(m, ex.gold), nullptr,
                                     out.grads);
    double inv = 1.0 / static_cast<double>(batch.size());
    out.loss *= inv;
    scale(out.grads, inv);
    out.loss += add_l2(m, l2_lambda, out.grads);
    return out;
}

Adagrad::Adagrad(const FeedForwardModel& m, double learning_rate, double epsilon)
    : lr_(learning_rate), eps_(epsilon), acc_(Gradients::zeros_like(m)) {}

namespace {

void adagrad_update(Eigen::Ref<Eigen::MatrixXd> theta, Eigen::Ref<Eigen::MatrixXd> acc,
                    const Eigen::MatrixXd& g, double lr, double eps) {
    acc.array() += g.array().square();
    theta.array() -= lr * g.array() / (acc.array().sqrt() + eps);
}

} // namespace

void Adagrad::apply(FeedForwardModel& m, const Gradients& g) {
    adagrad_update(m.w1, acc_.w1, g.w1, lr_, eps_);
    adagrad_update(m.w2, acc_.w2, g.w2, lr_, eps_);
    adagrad_update(m.b1, acc_.b1, g.b1, lr_, eps_);
    adagrad_update(m.b2, acc_.b2, g.b2, lr_, eps_);
    for (std::size_t i = 0; i < m.tables.size(); ++i)
        if (m.tables[i].trainable)
            adagrad_update(m.tables[i].weights, acc_.tables[i], g.tables[i], lr_, eps_);
    ++steps_;
}

std::vector<double> train(FeedForwardModel& m, const std::vector<Example>& data,
                          const TrainerConfig& cfg, const EpochCallback& after_epoch) {
    if (data.empty()) throw ValidationError("training data is empty");
    if (cfg.learning_rate <= 0) throw ValidationError("learning rate must be positive");
    if (cfg.l2_lambda < 0) throw ValidationError("l2 lambda must be nonnegative");
    if (cfg.dropout_prob < 0 || cfg.dropout_prob >= 1) throw ValidationError("dropout must be in [0,1)");
    if (cfg.batch_size < 1 || cfg.epochs < 1) throw ValidationError("batch size and epochs must be >= 1");

    std::vector<std::vector<int>> rows(data.size());
    std::vector<int> gold(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        rows[i] = compile_rows(m, data[i].values);
        gold[i] = gold_index(m, data[i].gold);
    }

    Rng rng(cfg.seed);
    Adagrad opt(m, cfg.learning_rate);
    Gradients grads = Gradients::zeros_like(m);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const double keep = 1.0 - cfg.dropout_prob;
    Eigen::VectorXd mask(m.hidden_size);

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            grads.set_zero();
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const Eigen::VectorXd* mp = nullptr;
                if (cfg.dropout_prob > 0.0) {
                    for (int j = 0; j < m.hidden_size; ++j)
                        mask[j] = rng.uniform() < keep ? 1.0 / keep : 0.0;
                    mp = &mask;
                }
                batch_loss += example_backprop(m, rows[order[k]], gold[order[k]], mp, grads);
            }
            double inv = 1.0 / static_cast<double>(end - start);
            batch_loss *= inv;
            scale(grads, inv);
            batch_loss += add_l2(m, cfg.l2_lambda, grads);
            if (!std::isfinite(batch_loss))
                throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batches + 1));
            opt.apply(m, grads);
            epoch_loss += batch_loss;
            ++batches;
        }
        trace.push_back(epoch_loss / batches);
        if (after_epoch) after_epoch(epoch, trace.back(), m);
    }
    return trace;
}

// --- serialization ------------------------------------------------------

namespace {

constexpr char kMagic[] = "codemix-ffnn";
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

void need(std::istream& in, char* buf, std::size_t n) {
    in.read(buf, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw ModelError("model file truncated");
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    need(in, reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    need(in, reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string get_string(std::istream& in) {
    std::uint32_t n = get_u32(in);
    std::string s(n, '\0');
    if (n > 0) need(in, s.data(), n);
    return s;
}

Eigen::MatrixXd get_matrix(std::istream& in) {
    std::uint32_t rows = get_u32(in), cols = get_u32(in);
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = get_f64(in);
    return m;
}

Eigen::VectorXd get_vector(std::istream& in) {
    std::uint32_t n = get_u32(in);
    Eigen::VectorXd v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = get_f64(in);
    return v;
}

} // namespace

void save_model(const FeedForwardModel& m, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic) - 1);
    put_u32(out, kVersion);
    put_string(out, m.task);
    put_u32(out, static_cast<std::uint32_t>(m.hidden_size));
    put_u32(out, static_cast<std::uint32_t>(m.labels.size()));
    for (const auto& l : m.labels) put_string(out, l);
    put_u32(out, static_cast<std::uint32_t>(m.tables.size()));
    for (const auto& t : m.tables) {
        put_string(out, t.name);
        put_u32(out, static_cast<std::uint32_t>(t.dim));
        put_u32(out, t.trainable ? 1 : 0);
        put_u32(out, static_cast<std::uint32_t>(t.vocab.size()));
        for (const auto& w : t.vocab) put_string(out, w);
        put_matrix(out, t.weights);
    }
    put_u32(out, static_cast<std::uint32_t>(m.slots.size()));
    for (const auto& s : m.slots) {
        put_string(out, s.name);
        put_u32(out, static_cast<std::uint32_t>(s.table));
    }
    put_matrix(out, m.w1);
    put_vector(out, m.b1);
    put_matrix(out, m.w2);
    put_vector(out, m.b2);
    if (!out) throw ModelError("failed to write model stream");
}

FeedForwardModel load_model(std::istream& in) {
    char magic[sizeof(kMagic) - 1];
    need(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw ModelError(std::string("bad model magic, expected '") + kMagic + "'");
    std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw ModelError("unsupported model format version " + std::to_string(version) + ", expected " +
                         std::to_string(kVersion));
    FeedForwardModel m;
    m.task = get_string(in);
    m.hidden_size = static_cast<int>(get_u32(in));
    std::uint32_t n_labels = get_u32(in);
    for (std::uint32_t i = 0; i < n_labels; ++i) m.labels.push_back(get_string(in));
    std::uint32_t n_tables = get_u32(in);
    for (std::uint32_t i = 0; i < n_tables; ++i) {
        FeatureTable t;
        t.name = get_string(in);
        t.dim = static_cast<int>(get_u32(in));
        t.trainable = get_u32(in) != 0;
        std::uint32_t n_rows = get_u32(in);
        for (std::uint32_t r = 0; r < n_rows; ++r) t.vocab.push_back(get_string(in));
        t.weights = get_matrix(in);
        if (t.weights.rows() != static_cast<Eigen::Index>(t.vocab.size()) || t.weights.cols() != t.dim)
            throw ModelError("table '" + t.name + "' has inconsistent shape");
        m.tables.push_back(std::move(t));
    }
    std::uint32_t n_slots = get_u32(in);
    for (std::uint32_t i = 0; i < n_slots; ++i) {
        InputSlot s;
        s.name = get_string(in);
        s.table = static_cast<int>(get_u32(in));
        if (s.table < 0 || s.table >= static_cast<int>(m.tables.size()))
            throw ModelError("slot '" + s.name + "' references a missing table");
        m.slots.push_back(std::move(s));
    }
    m.w1 = get_matrix(in);
    m.b1 = get_vector(in);
    m.w2 = get_matrix(in);
    m.b2 = get_vector(in);
    m.rebuild_indexes();
    if (m.w1.cols() != m.input_width() || m.w1.rows() != m.hidden_size ||
        m.w2.rows() != static_cast<Eigen::Index>(m.labels.size()) || m.w2.cols() != m.hidden_size)
        throw ModelError("model weight shapes are inconsistent with the layout");
    return m;
}

void save_model_file(const FeedForwardModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    save_model(m, out);
}

FeedForwardModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_model(in);
}

} // namespace codemix::nn
