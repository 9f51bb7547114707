#include <catch2/catch_amalgamated.hpp>

#include <fruitgrade/classifiers.hpp>
#include <fruitgrade/rng.hpp>

#include <cmath>

using namespace fruitgrade;
using namespace fruitgrade::classifiers;

namespace {

double sse_of(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t) {
    return mlp_residuals(m, x, t).squaredNorm();
}

MlpModel random_mlp(int d, int h, int k, std::uint64_t seed) {
    MlpModel m;
    m.w1.resize(h, d);
    m.b1.resize(h);
    m.w2.resize(k, h);
    m.b2.resize(k);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2.data()[i] = rng.uniform(-1, 1);
    return m;
}

} // namespace

TEST_CASE("LM learns the identity map") {
    Eigen::MatrixXd x(11, 1), t(11, 1);
    for (int i = 0; i <= 10; ++i) {
        x(i, 0) = i / 10.0;
        t(i, 0) = x(i, 0);
    }
    MlpConfig cfg;
    auto [model, rec] = train_mlp(x, t, cfg, 1);
    CHECK(rmse_of(mlp_residuals(model, x, t)) < 1e-3);
}

TEST_CASE("LM solves XOR to full training accuracy") {
    Eigen::MatrixXd x(4, 2), t(4, 2);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    t << 1, 0, 0, 1, 0, 1, 1, 0; // one-hot: class 0 = equal bits
    MlpConfig cfg;
    auto [model, rec] = train_mlp(x, t, cfg, 3);
    for (int i = 0; i < 4; ++i) {
        int pred = classify(model.forward(x.row(i).transpose()));
        int truth = t(i, 0) > 0.5 ? 0 : 1;
        CHECK(pred == truth);
    }
}

TEST_CASE("zero training epochs return the seeded initialization unchanged") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
    Eigen::MatrixXd t = Eigen::MatrixXd::Random(6, 2);
    MlpConfig cfg;
    cfg.max_epochs = 0;
    auto [a, rec_a] = train_mlp(x, t, cfg, 77);
    auto [b, rec_b] = train_mlp(x, t, cfg, 77);
    CHECK(rec_a.rmse.empty());
    CHECK(rec_a.stop_reason == "none");
    CHECK(a.w1 == b.w1);
    CHECK(a.b2 == b.b2);
    // weights drawn uniformly within the configured range
    CHECK(a.w1.cwiseAbs().maxCoeff() <= cfg.init_range);
}

TEST_CASE("accepted-step RMSE is non-increasing") {
    Rng rng(5);
    Eigen::MatrixXd x(30, 3), t(30, 2);
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 3; ++j)
            x(i, j) = rng.uniform();
        t(i, 0) = std::sin(x(i, 0) * 3.0);
        t(i, 1) = x(i, 1) * x(i, 2);
    }
    MlpConfig cfg;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto [model, rec] = train_mlp(x, t, cfg, seed);
        for (std::size_t e = 1; e < rec.rmse.size(); ++e)
            CHECK(rec.rmse[e] <= rec.rmse[e - 1]);
    }
}

TEST_CASE("LM gradient matches central finite differences") {
    Rng rng(8);
    Eigen::MatrixXd x(7, 2), t(7, 2);
    for (int i = 0; i < 7; ++i) {
        x(i, 0) = rng.uniform(-1, 1);
        x(i, 1) = rng.uniform(-1, 1);
        t(i, 0) = rng.uniform(-1, 1);
        t(i, 1) = rng.uniform(-1, 1);
    }
    for (std::uint64_t s = 0; s < 5; ++s) {
        MlpModel m = random_mlp(2, 3, 2, 100 + s);
        Eigen::VectorXd r = mlp_residuals(m, x, t);
        Eigen::MatrixXd jac = mlp_jacobian(m, x, t);
        Eigen::VectorXd grad = jac.transpose() * r; // gradient of 1/2 ||r||^2
        Eigen::VectorXd theta = detail::pack(m);
        const double h = 1e-6;
        for (Eigen::Index p = 0; p < theta.size(); ++p) {
            Eigen::VectorXd tp = theta, tm = theta;
            tp[p] += h;
            tm[p] -= h;
            MlpModel mp = m, mm = m;
            detail::unpack(tp, mp);
            detail::unpack(tm, mm);
            double fd = (0.5 * sse_of(mp, x, t) - 0.5 * sse_of(mm, x, t)) / (2 * h);
            double denom = std::max(std::abs(fd), 1e-4);
            CHECK(std::abs(grad[p] - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("LM step aligns with the negative gradient at huge damping") {
    Rng rng(9);
    Eigen::MatrixXd x(10, 2), t(10, 1);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
        t(i, 0) = rng.uniform();
    }
    MlpModel m = random_mlp(2, 4, 1, 42);
    Eigen::MatrixXd jac = mlp_jacobian(m, x, t);
    Eigen::VectorXd grad = jac.transpose() * mlp_residuals(m, x, t);
    Eigen::MatrixXd damped = jac.transpose() * jac;
    damped.diagonal().array() += 1e9;
    Eigen::VectorXd delta = damped.ldlt().solve(-grad);
    double cosine = -delta.dot(grad) / (delta.norm() * grad.norm());
    CHECK(cosine > 0.999);
}

TEST_CASE("RBF with tiny spread interpolates isolated points") {
    Eigen::MatrixXd x(3, 1), t(3, 1);
    x << 0.0, 0.5, 1.0;
    t << 2.0, -1.0, 3.0;
    RbfConfig cfg;
    cfg.sigma = 0.05;
    cfg.sub_radius = 0.3; // every point becomes a center
    auto m = train_rbf(x, t, cfg);
    REQUIRE(m.centers.rows() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(m.forward(x.row(i).transpose())[0] - t(i, 0)) < 1e-6);
}

TEST_CASE("RBF fits a constant target through the bias") {
    Rng rng(10);
    Eigen::MatrixXd x(20, 2);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Constant(20, 1, 4.25);
    RbfConfig cfg;
    cfg.sigma = 0.4;
    auto m = train_rbf(x, t, cfg);
    Eigen::VectorXd probe(2);
    probe << 0.31, 0.62;
    CHECK(m.forward(probe)[0] == Catch::Approx(4.25).margin(1e-6));
}

TEST_CASE("huge spread degenerates the RBF to a prior fit with a warning") {
    Rng rng(11);
    Eigen::MatrixXd x(30, 2);
    Eigen::MatrixXd t(30, 2);
    for (int i = 0; i < 30; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
        t(i, 0) = i < 20 ? 1.0 : 0.0;
        t(i, 1) = i < 20 ? 0.0 : 1.0;
    }
    RbfConfig cfg;
    cfg.sigma = 1e6;
    auto m = train_rbf(x, t, cfg);
    CHECK(m.sigma_warning);
    Eigen::VectorXd probe(2);
    probe << 0.5, 0.5;
    auto scores = m.forward(probe);
    CHECK(scores[0] == Catch::Approx(20.0 / 30.0).margin(1e-3));
    CHECK(scores[1] == Catch::Approx(10.0 / 30.0).margin(1e-3));
}

TEST_CASE("RBF closed-form weights are least-squares optimal") {
    Rng rng(12);
    Eigen::MatrixXd x(25, 2), t(25, 2);
    for (int i = 0; i < 25; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
        t(i, 0) = std::sin(3 * x(i, 0));
        t(i, 1) = x(i, 1);
    }
    RbfConfig cfg;
    cfg.sigma = 0.3;
    auto m = train_rbf(x, t, cfg);
    REQUIRE_FALSE(m.ridge_used);
    auto train_sse = [&](const RbfModel& model) {
        double s = 0;
        for (int i = 0; i < 25; ++i)
            s += (model.forward(x.row(i).transpose()) - t.row(i).transpose()).squaredNorm();
        return s;
    };
    double base = train_sse(m);
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.weights.cols(); ++c) {
            for (double d : {-1e-3, 1e-3}) {
                RbfModel p = m;
                p.weights(r, c) += d;
                CHECK(train_sse(p) >= base - 1e-12);
            }
        }
    }
}

TEST_CASE("argmax decoding breaks ties toward the lowest class") {
    Eigen::VectorXd s(5);
    s << 0.9, 0.1, 0, 0, 0;
    CHECK(classify(s) == 0);
    s << 0.2, 0.2, 0.2, 0.2, 0.2;
    CHECK(classify(s) == 0);
    s << 0.1, 0.3, 0.3, 0.1, 0.0;
    CHECK(classify(s) == 1);
    // adding a constant never changes the argmax
    CHECK(classify(Eigen::VectorXd(s.array() + 7.0)) == 1);
}

TEST_CASE("evaluation report on perfect and constant predictors") {
    Eigen::MatrixXd x(10, 1);
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = i;
        labels.push_back(i / 2); // balanced 5-class
    }
    ScoreFn perfect = [](const Eigen::VectorXd& v) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(5);
        s[static_cast<int>(v[0]) / 2] = 1.0;
        return s;
    };
    auto rep = evaluate_classifier(perfect, x, labels, 5);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.mean_recall == 1.0);

    ScoreFn constant = [](const Eigen::VectorXd&) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(5);
        s[0] = 1.0;
        return s;
    };
    auto rep2 = evaluate_classifier(constant, x, labels, 5);
    CHECK(rep2.accuracy == Catch::Approx(0.2));
    CHECK(rep2.recall[0] == 1.0);
    for (int c = 1; c < 5; ++c)
        CHECK(rep2.recall[c] == 0.0);
    // confusion rows sum to the true class counts
    for (int c = 0; c < 5; ++c)
        CHECK(rep2.confusion.row(c).sum() == 2);
}

TEST_CASE("trained MLP separates two clean blobs") {
    Rng rng(13);
    Eigen::MatrixXd x(40, 2), t(40, 2);
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        int c = i % 2;
        x(i, 0) = (c == 0 ? 0.2 : 0.8) + 0.03 * rng.gaussian();
        x(i, 1) = (c == 0 ? 0.2 : 0.8) + 0.03 * rng.gaussian();
        t(i, 0) = c == 0 ? 1.0 : 0.0;
        t(i, 1) = c == 1 ? 1.0 : 0.0;
        labels.push_back(c);
    }
    MlpConfig cfg;
    auto [model, rec] = train_mlp(x, t, cfg, 21);
    ScoreFn score = [&](const Eigen::VectorXd& v) { return model.forward(v); };
    auto rep = evaluate_classifier(score, x, labels, 2);
    CHECK(rep.accuracy >= 0.99);
}

TEST_CASE("model json round trips") {
    MlpModel m = random_mlp(3, 4, 2, 55);
    auto back = mlp_from_json(to_json(m));
    CHECK(back.w1 == m.w1);
    CHECK(back.b1 == m.b1);
    CHECK(back.w2 == m.w2);
    CHECK(back.b2 == m.b2);

    RbfModel r;
    r.centers = Eigen::MatrixXd::Random(3, 2);
    r.sigma = 0.7;
    r.weights = Eigen::MatrixXd::Random(4, 2);
    r.ridge_used = true;
    r.sigma_warning = false;
    auto rb = rbf_from_json(to_json(r));
    CHECK(rb.centers == r.centers);
    CHECK(rb.sigma == r.sigma);
    CHECK(rb.weights == r.weights);
    CHECK(rb.ridge_used == r.ridge_used);
}
