#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <sstream>
#include <vector>

#include "codemix/error.hpp"
#include "codemix/nn.hpp"
#include "codemix/rng.hpp"
#include "gradcheck.hpp"
#include "testutil.hpp"

using namespace codemix;
using gradcheck::Problem;
using gradcheck::loss_of;
using gradcheck::max_gradient_error;
using gradcheck::near_kink;
using gradcheck::random_problem;

TEST_CASE("forward output is a probability distribution") {
    Rng rng(11);
    for (int round = 0; round < 20; ++round) {
        Problem p = random_problem(rng);
        for (const auto& ex : p.batch) {
            Eigen::VectorXd probs = nn::forward(p.model, ex.values);
            REQUIRE(probs.size() == p.model.num_classes());
            CHECK(probs.minCoeff() >= 0.0);
            CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(42);
    const double eps = 1e-4;
    int checked = 0;
    int attempts = 0;
    while (checked < 30 && attempts < 400) {
        ++attempts;
        Problem p = random_problem(rng);
        double l2 = (checked % 2 == 0) ? 0.0 : 0.01;
        if (near_kink(p.model, p.batch, 1e-3)) continue;
        double worst = max_gradient_error(p.model, p.batch, l2, eps);
        CHECK(worst < 1e-4);
        ++checked;
    }
    REQUIRE(checked == 30);
}

TEST_CASE("loss includes the l2 term for trainable parameters only") {
    Rng rng(7);
    Problem p = random_problem(rng);
    double plain = loss_of(p.model, p.batch, 0.0);
    double with_l2 = loss_of(p.model, p.batch, 0.5);
    double norm2 = p.model.w1.squaredNorm() + p.model.b1.squaredNorm() +
                   p.model.w2.squaredNorm() + p.model.b2.squaredNorm();
    for (const auto& t : p.model.tables)
        if (t.trainable) norm2 += t.weights.squaredNorm();
    CHECK(with_l2 == doctest::Approx(plain + 0.25 * norm2).epsilon(1e-10));
}

TEST_CASE("predict breaks ties toward the first label") {
    Rng rng(3);
    Problem p = random_problem(rng);
    p.model.w2.setZero();
    p.model.b2.setZero();
    for (const auto& ex : p.batch) CHECK(nn::predict(p.model, ex.values) == 0);
}

TEST_CASE("unknown feature values fall back to <unk>, absent fallback errors") {
    Rng rng(5);
    Problem p = random_problem(rng);
    nn::Example ex = p.batch.front();
    ex.values[0] = "never-seen";
    Eigen::VectorXd via_unk = nn::forward(p.model, ex.values);
    nn::Example unk = ex;
    unk.values[0] = nn::kUnknown;
    CHECK(via_unk == nn::forward(p.model, unk.values));

    // the lang table carries no <unk> row
    nn::Example bad = p.batch.front();
    bad.values[3] = "fr";
    CHECK_THROWS_AS(nn::forward(p.model, bad.values), ValidationError);
}

TEST_CASE("language table spec pins the fixed vectors") {
    nn::TableSpec spec = nn::language_table_spec();
    CHECK(spec.dim == 2);
    CHECK_FALSE(spec.trainable);
    CHECK(spec.fixed_rows.at("hi") == Eigen::Vector2d(-0.25, 0.25));
    CHECK(spec.fixed_rows.at("en") == Eigen::Vector2d(0.25, -0.25));
    CHECK(spec.fixed_rows.at(nn::kNull) == Eigen::Vector2d(0.0, 0.0));
}

TEST_CASE("build_model seeds deterministically and honors pretrained rows") {
    emb::EmbeddingTable table;
    table.dimension = 3;
    table.entries["b"] = Eigen::Vector3d(1.0, 2.0, 3.0);
    table.oov_vector = Eigen::Vector3d(9.0, 9.0, 9.0);

    nn::TableSpec spec;
    spec.name = "word";
    spec.dim = 3;
    spec.vocab = {nn::kUnknown, "a", "b"};
    spec.pretrained = &table;

    auto build = [&] {
        return nn::build_model("test", {spec}, {{"w0", "word"}}, {"x", "y"}, 4, 99);
    };
    nn::FeedForwardModel m1 = build(), m2 = build();
    CHECK(m1.w1 == m2.w1);
    CHECK(m1.w2 == m2.w2);
    CHECK(m1.tables[0].weights == m2.tables[0].weights);

    int b_row = m1.tables[0].row_of.at("b");
    CHECK(m1.tables[0].weights.row(b_row) == Eigen::RowVector3d(1.0, 2.0, 3.0));
    int unk_row = m1.tables[0].row_of.at(nn::kUnknown);
    CHECK(m1.tables[0].weights.row(unk_row) == Eigen::RowVector3d(9.0, 9.0, 9.0));
    int a_row = m1.tables[0].row_of.at("a");
    CHECK(m1.tables[0].weights.row(a_row).cwiseAbs().maxCoeff() <= 0.25);

    // glorot bound for w1: sqrt(6 / (fan_in + fan_out))
    double bound = std::sqrt(6.0 / (m1.w1.rows() + m1.w1.cols()));
    CHECK(m1.w1.cwiseAbs().maxCoeff() <= bound);
    CHECK(m1.b1.isZero());
    CHECK(m1.b2.isZero());
}

TEST_CASE("adagrad shrinks effective steps and counts applications") {
    Rng rng(17);
    Problem p = random_problem(rng);
    nn::Adagrad opt(p.model, 0.1);
    CHECK(opt.steps() == 0);
    nn::LossAndGradients lg = nn::loss_and_gradients(p.model, p.batch, 0.0);
    Eigen::MatrixXd before = p.model.w1;
    std::vector<Eigen::MatrixXd> frozen;
    for (const auto& t : p.model.tables)
        if (!t.trainable) frozen.push_back(t.weights);
    opt.apply(p.model, lg.grads);
    CHECK(opt.steps() == 1);
    // first update with accumulator = g^2: step = lr * g / (sqrt(g^2) + eps)
    for (Eigen::Index i = 0; i < before.size(); ++i) {
        double g = lg.grads.w1.data()[i];
        if (g == 0.0) continue;
        double expect = before.data()[i] - 0.1 * g / (std::sqrt(g * g) + 1e-6);
        CHECK(p.model.w1.data()[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    // non-trainable tables never move
    std::size_t f = 0;
    for (const auto& t : p.model.tables)
        if (!t.trainable) CHECK(t.weights == frozen[f++]);
    CHECK(f == frozen.size());
}

TEST_CASE("training is bit-reproducible and reduces loss on a separable task") {
    std::vector<std::string> words = {nn::kUnknown, "aa", "bb", "cc", "dd"};
    nn::TableSpec spec;
    spec.name = "word";
    spec.dim = 4;
    spec.vocab = words;
    auto build = [&] {
        return nn::build_model("test", {spec}, {{"w0", "word"}}, {"L1", "L2"}, 8, 5);
    };

    std::vector<nn::Example> data;
    for (int r = 0; r < 8; ++r) {
        data.push_back({{"aa"}, "L1"});
        data.push_back({{"bb"}, "L1"});
        data.push_back({{"cc"}, "L2"});
        data.push_back({{"dd"}, "L2"});
    }
    nn::TrainerConfig config;
    config.epochs = 30;
    config.batch_size = 4;
    config.dropout_prob = 0.5;
    config.seed = 21;

    nn::FeedForwardModel m1 = build();
    std::vector<double> losses1 = nn::train(m1, data, config);
    nn::FeedForwardModel m2 = build();
    std::vector<double> losses2 = nn::train(m2, data, config);

    REQUIRE(losses1.size() == 30);
    CHECK(losses1 == losses2);
    CHECK(m1.w1 == m2.w1);
    CHECK(m1.w2 == m2.w2);
    CHECK(m1.tables[0].weights == m2.tables[0].weights);
    CHECK(losses1.back() < losses1.front());

    for (const auto& ex : data) {
        Eigen::VectorXd probs = nn::forward(m1, ex.values);
        CHECK(probs(m1.label_index.at(ex.gold)) > 0.5);
    }
}

TEST_CASE("epoch callback sees every epoch in order") {
    std::vector<std::string> words = {nn::kUnknown, "aa", "bb"};
    nn::TableSpec spec;
    spec.name = "word";
    spec.dim = 2;
    spec.vocab = words;
    nn::FeedForwardModel m =
        nn::build_model("test", {spec}, {{"w0", "word"}}, {"L1", "L2"}, 4, 5);
    std::vector<nn::Example> data = {{{"aa"}, "L1"}, {{"bb"}, "L2"}};
    nn::TrainerConfig config;
    config.epochs = 5;
    config.batch_size = 2;

    std::vector<int> seen;
    std::vector<double> cb_losses;
    std::vector<double> losses = nn::train(m, data, config,
                                           [&](int epoch, double mean_loss, const nn::FeedForwardModel& snapshot) {
                                               seen.push_back(epoch);
                                               cb_losses.push_back(mean_loss);
                                               CHECK(snapshot.num_classes() == 2);
                                           });
    CHECK(seen == std::vector<int>{1, 2, 3, 4, 5});
    REQUIRE(losses.size() == 5);
    CHECK(cb_losses == losses);
}

TEST_CASE("save/load round-trips to bit-identical forward outputs") {
    Rng rng(23);
    Problem p = random_problem(rng);
    nn::TrainerConfig config;
    config.epochs = 2;
    config.batch_size = 2;
    nn::train(p.model, p.batch, config);

    std::stringstream buf;
    nn::save_model(p.model, buf);
    nn::FeedForwardModel loaded = nn::load_model(buf);

    CHECK(loaded.task == p.model.task);
    CHECK(loaded.labels == p.model.labels);
    REQUIRE(loaded.tables.size() == p.model.tables.size());
    for (std::size_t t = 0; t < loaded.tables.size(); ++t) {
        CHECK(loaded.tables[t].vocab == p.model.tables[t].vocab);
        CHECK(loaded.tables[t].trainable == p.model.tables[t].trainable);
        CHECK(loaded.tables[t].weights == p.model.tables[t].weights);
    }
    CHECK(loaded.w1 == p.model.w1);
    CHECK(loaded.b1 == p.model.b1);
    CHECK(loaded.w2 == p.model.w2);
    CHECK(loaded.b2 == p.model.b2);
    for (const auto& ex : p.batch) {
        Eigen::VectorXd a = nn::forward(p.model, ex.values);
        Eigen::VectorXd b = nn::forward(loaded, ex.values);
        CHECK(a == b);
    }
}

TEST_CASE("load rejects malformed model payloads") {
    std::stringstream bad("{\"format\": \"something-else\"}");
    CHECK_THROWS_AS(nn::load_model(bad), ModelError);
    std::stringstream junk("not json at all");
    CHECK_THROWS_AS(nn::load_model(junk), ModelError);
}

TEST_CASE("build_model validates inputs") {
    nn::TableSpec spec;
    spec.name = "word";
    spec.dim = 2;
    spec.vocab = {nn::kUnknown};
    CHECK_THROWS_AS(nn::build_model("t", {spec}, {{"w0", "word"}}, {}, 4, 1), ValidationError);
    CHECK_THROWS_AS(nn::build_model("t", {spec}, {{"w0", "word"}}, {"x"}, 0, 1), ValidationError);
    CHECK_THROWS_AS(nn::build_model("t", {spec}, {{"w0", "nope"}}, {"x"}, 4, 1), ValidationError);
    nn::TableSpec bad = spec;
    bad.dim = 0;
    CHECK_THROWS_AS(nn::build_model("t", {bad}, {{"w0", "word"}}, {"x"}, 4, 1), ValidationError);
}
