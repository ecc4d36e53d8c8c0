#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "codemix/embeddings.hpp"

namespace codemix::nn {

inline constexpr const char* kUnknown = "<unk>";
inline constexpr const char* kNull = "<null>";
inline constexpr const char* kRoot = "<root>";
inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";

// One embedding block of the input layer. Non-trainable tables (the fixed
// language vectors) take part in the forward pass but never receive updates
// and are excluded from the l2 term.
struct FeatureTable {
    std::string name;
    int dim = 0;
    bool trainable = true;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, int> row_of;
    Eigen::MatrixXd weights; // vocab.size() x dim
    int fallback_row = -1;   // row of <unk>, or -1

    int rows() const { return static_cast<int>(vocab.size()); }
    int row(const std::string& value) const;
    void rebuild_index();
};

struct InputSlot {
    std::string name;
    int table = 0; // index into FeedForwardModel::tables
};

struct FeedForwardModel {
    std::string task; // "lid" | "pos" | "parser" | free-form
    std::vector<FeatureTable> tables;
    std::vector<InputSlot> slots;
    std::vector<std::string> labels;
    std::unordered_map<std::string, int> label_index;
    int hidden_size = 200;
    Eigen::MatrixXd w1; // hidden x input_width
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2; // labels x hidden
    Eigen::VectorXd b2;

    int input_width() const;
    int num_classes() const { return static_cast<int>(labels.size()); }
    int table_id(const std::string& name) const;
    void rebuild_indexes();
};

struct TableSpec {
    std::string name;
    int dim = 0;
    bool trainable = true;
    std::vector<std::string> vocab;
    const emb::EmbeddingTable* pretrained = nullptr;
    std::unordered_map<std::string, Eigen::VectorXd> fixed_rows;
};

// The fixed 2-dim language block: <null> -> (0,0), hi/en per language_tag_vector.
TableSpec language_table_spec();

// Builds and randomly initializes a model. Embedding rows come from
// `pretrained` where the word is covered, otherwise uniform in [-0.25, 0.25];
// hidden/output weights use Glorot-uniform init. Deterministic under `seed`.
FeedForwardModel build_model(const std::string& task, const std::vector<TableSpec>& tables,
                             const std::vector<std::pair<std::string, std::string>>& slots,
                             const std::vector<std::string>& labels, int hidden_size,
                             std::uint64_t seed);

struct Example {
    std::vector<std::string> values; // one per input slot
    std::string gold;                // class label; may be empty at inference
};

Eigen::VectorXd forward(const FeedForwardModel& model, const std::vector<std::string>& values);
inline Eigen::VectorXd forward(const FeedForwardModel& model, const Example& ex) {
    return forward(model, ex.values);
}

// Argmax with ties broken by label order.
int predict(const FeedForwardModel& model, const std::vector<std::string>& values);

struct Gradients {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
    std::vector<Eigen::MatrixXd> tables; // empty matrix for non-trainable tables

    static Gradients zeros_like(const FeedForwardModel& model);
    void set_zero();
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

// Mean cross entropy over the batch plus (l2_lambda/2)*||theta||^2; exact
// analytic gradients for every parameter.
LossAndGradients loss_and_gradients(const FeedForwardModel& model, const std::vector<Example>& batch,
                                    double l2_lambda);

class Adagrad {
public:
    Adagrad(const FeedForwardModel& model, double learning_rate, double epsilon = 1e-6);
    void apply(FeedForwardModel& model, const Gradients& grads);
    const Gradients& accumulators() const { return acc_; }
    int steps() const { return steps_; }

private:
    double lr_;
    double eps_;
    int steps_ = 0;
    Gradients acc_;
};

struct TrainerConfig {
    double learning_rate = 0.01;
    double l2_lambda = 1e-8;
    double dropout_prob = 0.5;
    int batch_size = 32;
    int epochs = 20;
    std::uint64_t seed = 1;
};

using EpochCallback = std::function<void(int epoch, double mean_loss, const FeedForwardModel&)>;

// Mini-batch Adagrad with inverted dropout on the hidden layer. Returns the
// per-epoch mean batch loss. Bit-reproducible for fixed seed/config/data.
std::vector<double> train(FeedForwardModel& model, const std::vector<Example>& data,
                          const TrainerConfig& config, const EpochCallback& after_epoch = {});

void save_model(const FeedForwardModel& model, std::ostream& out);
FeedForwardModel load_model(std::istream& in);
void save_model_file(const FeedForwardModel& model, const std::string& path);
FeedForwardModel load_model_file(const std::string& path);

} // namespace codemix::nn
