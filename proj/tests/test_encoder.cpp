#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evisec/encoder.hpp"
#include "helpers.hpp"
#include "taped_ref.hpp"

using namespace evisec;

namespace {

GruCell zero_cell(int din, int dout) {
    GruCell c;
    c.wz = c.uz = c.wr = c.ur = c.wh = c.uh = Mat::Zero(din, din);
    c.bz = c.br = c.bh = Mat::Zero(din, dout);
    c.q = Mat::Ones(din, 1);
    return c;
}

}  // namespace

TEST_CASE("gcn layer algebra") {
    Mat p1(1, 1);
    p1 << 1.0;
    Mat z1(1, 2);
    z1 << -2.0, 3.0;
    Mat out = gcn_layer(p1, z1, Mat::Identity(2, 2), Activation::relu);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 3.0);

    Mat p3 = Mat::Constant(3, 3, 1.0 / 3.0);
    Mat z3(3, 2);
    z3 << 1, 2, 1, 2, 1, 2;
    Mat out3 = gcn_layer(p3, z3, Mat::Identity(2, 2), Activation::relu);
    CHECK((out3.row(0) - out3.row(1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out3.row(1) - out3.row(2)).cwiseAbs().maxCoeff() < 1e-12);

    Mat p2 = Mat::Constant(2, 2, 0.5);
    Mat out2 = gcn_layer(p2, Mat::Identity(2, 2), Mat::Identity(2, 2), Activation::identity);
    CHECK((out2 - Mat::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(gcn_layer(p2, Mat::Zero(3, 2), Mat::Zero(2, 2), Activation::relu),
                    DimensionError);
}

TEST_CASE("top-k summarization") {
    Vec q(2);
    q << 1.0, 0.0;
    Mat z(3, 2);
    z << 0.5, 7.0, 2.0, -1.0, 1.0, 4.0;

    Mat all = summarize_embeddings(z, q, 3);
    // rows ordered by first coordinate: 2.0, 1.0, 0.5, each scaled by tanh(score)
    CHECK(all(0, 0) == doctest::Approx(std::tanh(2.0) * 2.0));
    CHECK(all(1, 0) == doctest::Approx(std::tanh(1.0) * 1.0));
    CHECK(all(2, 1) == doctest::Approx(std::tanh(0.5) * 7.0));

    Mat top1 = summarize_embeddings(z, q, 1);
    CHECK(top1.rows() == 1);
    CHECK(top1(0, 0) == doctest::Approx(std::tanh(2.0) * 2.0));
    CHECK(top1(0, 1) == doctest::Approx(std::tanh(2.0) * -1.0));

    Mat padded = summarize_embeddings(z, q, 5);
    CHECK(padded.rows() == 5);
    CHECK(padded.row(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(padded.row(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weight evolution gate limits") {
    std::mt19937_64 rng(71);
    const int din = 3, dout = 2;
    Mat z = testutil::random_matrix(4, din, rng);
    Mat w = testutil::random_matrix(din, dout, rng);

    GruCell closed = zero_cell(din, dout);
    closed.bz = Mat::Constant(din, dout, -1000.0);  // update gate 0
    CHECK((evolve_weights(z, w, closed) - w).cwiseAbs().maxCoeff() < 1e-12);

    GruCell open = zero_cell(din, dout);
    open.bz = Mat::Constant(din, dout, 1000.0);  // update gate 1, candidate tanh(0) = 0
    CHECK(evolve_weights(z, w, open).cwiseAbs().maxCoeff() < 1e-12);

    GruCell zero = zero_cell(din, dout);
    CHECK((evolve_weights(z, w, zero) - 0.5 * w).cwiseAbs().maxCoeff() < 1e-12);

    GruCell bad = zero_cell(din + 1, dout);
    CHECK_THROWS_AS(evolve_weights(z, w, bad), DimensionError);
}

TEST_CASE("window encoding advances weights once per timestep and layer") {
    std::mt19937_64 rng(73);
    GraphSnapshot snap = testutil::random_snapshot(5, 0.5, 3, rng);
    SnapshotWindow w;
    w.snapshots = {snap, snap, snap};
    WindowInput input = window_input(w);

    EncoderParams params = init_params({3, 4, 2}, 2, HeadKind::node_classification, 1);
    EncodeStats stats;
    encode_window(input, params.init, params.cells, &stats);
    CHECK(stats.evolve_calls == 6);
    CHECK(stats.gcn_calls == 6);

    EncodeStats single;
    encode_window({input[0]}, params.init, params.cells, &single);
    CHECK(single.evolve_calls == 2);
}

TEST_CASE("frozen gates on repeated snapshots keep embeddings fixed") {
    std::mt19937_64 rng(79);
    GraphSnapshot snap = testutil::random_snapshot(5, 0.5, 3, rng);
    SnapshotWindow w;
    w.snapshots = {snap, snap, snap};
    WindowInput input = window_input(w);

    EvolvingWeights init;
    init.layers = {testutil::random_matrix(3, 2, rng)};
    GruCell frozen = zero_cell(3, 2);
    frozen.bz = Mat::Constant(3, 2, -1000.0);

    Mat z1 = encode_window({input[0]}, init, {frozen}).final_embedding;
    Mat z3 = encode_window(input, init, {frozen}).final_embedding;
    CHECK((z1 - z3).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("head application") {
    Mat emb(4, 3);
    std::mt19937_64 rng(83);
    emb = testutil::random_matrix(4, 3, rng);

    TaskHead zero_head{HeadKind::node_classification, Mat::Zero(3, 2)};
    CHECK(apply_head(emb, zero_head, std::vector<int>{0, 2}).cwiseAbs().maxCoeff() == 0.0);

    TaskHead id_head{HeadKind::node_classification, Mat::Identity(3, 3)};
    Mat logits = apply_head(emb, id_head, std::vector<int>{1});
    CHECK((logits.row(0).transpose() - emb.row(1).transpose()).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(apply_head(emb, id_head, std::vector<int>{7}), ValidationError);

    TaskHead pair_head{HeadKind::edge_classification, testutil::random_matrix(6, 2, rng)};
    Mat ij = apply_head(emb, pair_head, std::vector<std::pair<int, int>>{{1, 3}});
    Mat ji = apply_head(emb, pair_head, std::vector<std::pair<int, int>>{{3, 1}});
    CHECK((ij - ji).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("node permutation permutes embeddings") {
    std::mt19937_64 rng(89);
    for (int trial = 0; trial < 5; ++trial) {
        GraphSnapshot snap = testutil::random_snapshot(6, 0.5, 3, rng);
        std::vector<int> perm{3, 1, 5, 0, 2, 4};
        GraphSnapshot permuted;
        permuted.num_nodes = 6;
        for (auto [a, b] : snap.edges) permuted.add_edge(perm[a], perm[b]);
        permuted.finalize_edges();
        permuted.features = Mat::Zero(6, 3);
        for (int i = 0; i < 6; ++i) permuted.features.row(perm[i]) = snap.features.row(i);

        EncoderParams params = init_params({3, 2}, 2, HeadKind::node_classification, trial + 1);
        SnapshotWindow w1, w2;
        w1.snapshots = {snap};
        w2.snapshots = {permuted};
        Mat z = encode_window(window_input(w1), params.init, params.cells).final_embedding;
        Mat zp = encode_window(window_input(w2), params.init, params.cells).final_embedding;
        for (int i = 0; i < 6; ++i)
            CHECK((z.row(i) - zp.row(perm[i])).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("same seed gives identical parameters and embeddings") {
    std::mt19937_64 rng(97);
    GraphSnapshot snap = testutil::random_snapshot(6, 0.4, 3, rng);
    SnapshotWindow w;
    w.snapshots = {snap, snap};
    EncoderParams a = init_params({3, 4, 2}, 2, HeadKind::node_classification, 42);
    EncoderParams b = init_params({3, 4, 2}, 2, HeadKind::node_classification, 42);
    for (size_t i = 0; i < a.named_tensors().size(); ++i)
        CHECK(*a.named_tensors()[i].second == *b.named_tensors()[i].second);
    Mat z1 = encode_window(window_input(w), a.init, a.cells).final_embedding;
    Mat z2 = encode_window(window_input(w), b.init, b.cells).final_embedding;
    CHECK(z1 == z2);
}

TEST_CASE("taped forward reproduces the plain forward") {
    std::mt19937_64 rng(101);
    GraphSnapshot snap = testutil::random_snapshot(5, 0.5, 3, rng);
    GraphSnapshot snap2 = testutil::random_snapshot(5, 0.5, 3, rng);
    SnapshotWindow w;
    snap2.timestep = 1;
    w.snapshots = {snap, snap2};
    WindowInput input = window_input(w);
    WindowInput neg = negative_window(w, 0.3);

    EncoderParams params = init_params({3, 4, 3}, 3, HeadKind::node_classification, 5);
    std::vector<int> nodes{0, 1, 2, 3, 4};
    Mat y = Mat::Zero(5, 3);
    for (int i = 0; i < 5; ++i) y(i, i % 3) = 1.0;

    const double plain = testutil::plain_loss(params, input, neg, y, nodes, 0.6, 0.8, 10.0);
    testutil::TapedLoss taped =
        testutil::build_taped_loss(params, input, neg, y, nodes, 0.6, 0.8, 10.0);
    CHECK(taped.tape.scalar(taped.loss) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("pipeline gradients match finite differences") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 3; ++trial) {
        GraphSnapshot snap = testutil::random_snapshot(5, 0.5, 3, rng);
        GraphSnapshot snap2 = testutil::random_snapshot(5, 0.5, 3, rng);
        snap2.timestep = 1;
        SnapshotWindow w;
        w.snapshots = {snap, snap2};
        WindowInput input = window_input(w);
        WindowInput neg = negative_window(w, 0.3);

        EncoderParams params = init_params({3, 3, 2}, 2, HeadKind::node_classification, trial + 7);
        std::vector<int> nodes{0, 1, 2, 3, 4};
        Mat y = Mat::Zero(5, 2);
        for (int i = 0; i < 5; ++i) y(i, i % 2) = 1.0;

        testutil::TapedLoss taped =
            testutil::build_taped_loss(params, input, neg, y, nodes, 0.6, 0.8, 10.0);
        taped.tape.backward(taped.loss);

        auto tensors = params.named_tensors();
        for (size_t ti = 0; ti < tensors.size(); ++ti) {
            Mat& tensor = *tensors[ti].second;
            const Mat& g = taped.tape.grad(taped.param_ids[ti]);
            for (int i = 0; i < tensor.rows(); ++i)
                for (int j = 0; j < tensor.cols(); ++j) {
                    const double fd = testutil::central_diff(tensor, i, j, [&] {
                        return testutil::plain_loss(params, input, neg, y, nodes, 0.6, 0.8, 10.0);
                    });
                    if (std::abs(fd) < 1e-7 && std::abs(g(i, j)) < 1e-7) continue;
                    INFO(tensors[ti].first, "(", i, ",", j, ")");
                    CHECK(testutil::rel_err(g(i, j), fd) < 1e-4);
                }
        }
    }
}
