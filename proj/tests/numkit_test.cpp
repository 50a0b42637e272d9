#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "rgame/checkpoint.hpp"
#include "rgame/encoder.hpp"
#include "rgame/gradcheck.hpp"
#include "rgame/ops.hpp"
#include "rgame/params.hpp"
#include "rgame/players.hpp"
#include "rgame/rng.hpp"
#include "rgame/tensor.hpp"

using namespace rgame;

TEST(Tensor, RowMajorLayout) {
    Tensor2 t(2, 3);
    t.at(0, 0) = 1.0;
    t.at(0, 2) = 3.0;
    t.at(1, 0) = 4.0;
    EXPECT_EQ(t.data[0], 1.0);
    EXPECT_EQ(t.data[2], 3.0);
    EXPECT_EQ(t.data[3], 4.0);
    EXPECT_EQ(t.row(1)[0], 4.0);
}

TEST(Tensor, ShapeErrorNamesBothShapes) {
    Tensor2 a(2, 3), b(3, 2);
    try {
        require_same_shape(a, b, "test");
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2x3]"), std::string::npos);
        EXPECT_NE(msg.find("[3x2]"), std::string::npos);
    }
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, Uniform01InRange) {
    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, BernoulliMatchesRate) {
    Rng r(11);
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ones += r.bernoulli(0.3);
    EXPECT_NEAR(static_cast<double>(ones) / n, 0.3, 0.01);
}

TEST(Rng, MixSeedSeparatesStreams) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(9, 3), mix_seed(9, 3));
}

TEST(Rng, ShuffleIsAPermutation) {
    Rng r(5);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto sorted = v;
    r.shuffle(v);
    auto check = v;
    std::sort(check.begin(), check.end());
    EXPECT_EQ(check, sorted);
}

TEST(Affine, FrozenExample) {
    Tensor2 w(2, 2);
    w.at(0, 0) = 2.0;
    w.at(0, 1) = 3.0;
    w.at(1, 0) = 4.0;
    w.at(1, 1) = 5.0;
    const Vec x{1.0, 0.0};
    const Vec b{0.0, 0.0};
    const Vec y = affine(w, x, b);
    ASSERT_EQ(y.size(), 2u);
    EXPECT_DOUBLE_EQ(y[0], 2.0);
    EXPECT_DOUBLE_EQ(y[1], 4.0);
}

TEST(Affine, BiasAdds) {
    Tensor2 w(1, 2);
    w.at(0, 0) = 1.0;
    w.at(0, 1) = 1.0;
    const Vec y = affine(w, Vec{2.0, 3.0}, Vec{10.0});
    EXPECT_DOUBLE_EQ(y[0], 15.0);
}

TEST(Affine, MismatchThrows) {
    Tensor2 w(2, 3);
    EXPECT_THROW(affine(w, Vec{1.0, 2.0}, Vec{0.0, 0.0}), ShapeError);
}

TEST(SoftmaxXent, UniformLogits) {
    const XentResult r = softmax_xent(Vec{0.0, 0.0}, 0);
    EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
    EXPECT_NEAR(r.probs[0], 0.5, 1e-12);
    EXPECT_NEAR(r.dlogits[0], -0.5, 1e-12);
    EXPECT_NEAR(r.dlogits[1], 0.5, 1e-12);
}

TEST(SoftmaxXent, ProbsNormalizedAndGradSumsToZero) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Vec logits(5);
        for (double& v : logits) v = rng.uniform(-30.0, 30.0);
        const XentResult r = softmax_xent(logits, trial % 5);
        double psum = 0.0, gsum = 0.0;
        for (double p : r.probs) psum += p;
        for (double g : r.dlogits) gsum += g;
        EXPECT_NEAR(psum, 1.0, 1e-12);
        EXPECT_NEAR(gsum, 0.0, 1e-12);
        EXPECT_GE(r.loss, 0.0);
    }
}

TEST(SoftmaxXent, HugeLogitsStayFinite) {
    const XentResult r = softmax_xent(Vec{1000.0, -1000.0}, 1);
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_GT(r.loss, 100.0);
}

TEST(SoftmaxXent, BadLabelThrows) {
    EXPECT_THROW(softmax_xent(Vec{0.0, 0.0}, 2), LabelError);
}

TEST(Adam, ZeroGradLeavesParamsUnchanged) {
    ParamSet p;
    p.add("w", 2, 2);
    Rng rng(1);
    init_uniform(p, "w", 0.5, rng);
    const Tensor2 before = p.value("w");
    adam_update(p, AdamConfig{});
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(p.value("w").data[i], before.data[i]);
    }
}

TEST(Adam, ConstantGradApproachesLrStep) {
    ParamSet p;
    p.add("w", 1, 1);
    p.value("w").data[0] = 0.0;
    const AdamConfig cfg;
    double prev = 0.0;
    double last_step = 0.0;
    for (int t = 0; t < 500; ++t) {
        p.grad("w").data[0] = 3.0;
        adam_update(p, cfg);
        last_step = prev - p.value("w").data[0];
        prev = p.value("w").data[0];
    }
    EXPECT_NEAR(last_step, cfg.lr, cfg.lr * 1e-3);
}

TEST(Adam, GradsZeroedAfterUpdate) {
    ParamSet p;
    p.add("w", 1, 2);
    p.grad("w").data[0] = 1.0;
    p.grad("w").data[1] = -2.0;
    adam_update(p, AdamConfig{});
    EXPECT_EQ(p.grad("w").data[0], 0.0);
    EXPECT_EQ(p.grad("w").data[1], 0.0);
}

TEST(Adam, NonFiniteGradNamesParameter) {
    ParamSet p;
    p.add("good", 1, 1);
    p.add("bad.w", 1, 1);
    p.grad("bad.w").data[0] = std::nan("");
    try {
        adam_update(p, AdamConfig{});
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.w"), std::string::npos);
    }
}

namespace {

ParamSet tiny_encoder(std::size_t vocab = 7, std::size_t embed = 4, std::size_t hidden = 3,
                      std::uint64_t seed = 9) {
    ParamSet p;
    add_encoder_params(p, EncoderDims{vocab, embed, hidden});
    Rng rng(seed);
    for (const auto& [name, t] : p.values) init_uniform(p, name, 0.4, rng);
    return p;
}

}  // namespace

TEST(Encoder, ShapesAndDeterminism) {
    const ParamSet p = tiny_encoder();
    const std::vector<std::size_t> toks{1, 2, 3, 4, 5};
    const EncoderTrace a = encode_sequence(toks, p);
    const EncoderTrace b = encode_sequence(toks, p);
    EXPECT_EQ(a.per_token.rows, 5u);
    EXPECT_EQ(a.per_token.cols, 6u);
    EXPECT_EQ(a.pooled.size(), 6u);
    for (std::size_t i = 0; i < a.per_token.size(); ++i) {
        EXPECT_EQ(a.per_token.data[i], b.per_token.data[i]);
    }
    for (std::size_t k = 0; k < a.pooled.size(); ++k) EXPECT_EQ(a.pooled[k], b.pooled[k]);
}

TEST(Encoder, PooledIsMeanOfPerToken) {
    const ParamSet p = tiny_encoder();
    const std::vector<std::size_t> toks{0, 6, 2};
    const EncoderTrace t = encode_sequence(toks, p);
    for (std::size_t k = 0; k < t.pooled.size(); ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < toks.size(); ++i) mean += t.per_token.at(i, k);
        mean /= static_cast<double>(toks.size());
        EXPECT_NEAR(t.pooled[k], mean, 1e-12);
    }
}

// with tied direction parameters, reversing the input swaps the two halves
TEST(Encoder, TiedPalindromeSymmetry) {
    ParamSet p = tiny_encoder();
    p.value("bwd.w_in") = p.value("fwd.w_in");
    p.value("bwd.w_rec") = p.value("fwd.w_rec");
    p.value("bwd.b") = p.value("fwd.b");
    const std::vector<std::size_t> toks{1, 4, 2, 6};
    const std::vector<std::size_t> rev{6, 2, 4, 1};
    const EncoderTrace a = encode_sequence(toks, p);
    const EncoderTrace b = encode_sequence(rev, p);
    const std::size_t H = 3, L = 4;
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t k = 0; k < H; ++k) {
            EXPECT_NEAR(a.per_token.at(i, k), b.per_token.at(L - 1 - i, H + k), 1e-12);
            EXPECT_NEAR(a.per_token.at(i, H + k), b.per_token.at(L - 1 - i, k), 1e-12);
        }
    }
    for (std::size_t k = 0; k < H; ++k) {
        EXPECT_NEAR(a.pooled[k], b.pooled[H + k], 1e-12);
        EXPECT_NEAR(a.pooled[H + k], b.pooled[k], 1e-12);
    }
}

TEST(Encoder, EmptyInputThrows) {
    const ParamSet p = tiny_encoder();
    EXPECT_THROW(encode_sequence(std::vector<std::size_t>{}, p), EmptyInputError);
}

TEST(Encoder, TokenOutOfVocabThrows) {
    const ParamSet p = tiny_encoder();
    EXPECT_THROW(encode_sequence(std::vector<std::size_t>{1, 7}, p), VocabError);
}

TEST(Encoder, InitialStateChangesOutput) {
    const ParamSet p = tiny_encoder();
    const std::vector<std::size_t> toks{1, 2, 3};
    const EncoderTrace plain = encode_sequence(toks, p);
    const Vec h0{0.3, -0.2, 0.5};
    const EncoderTrace seeded = encode_sequence(toks, p, h0);
    double diff = 0.0;
    for (std::size_t i = 0; i < plain.per_token.size(); ++i) {
        diff += std::abs(plain.per_token.data[i] - seeded.per_token.data[i]);
    }
    EXPECT_GT(diff, 1e-6);
    const Vec zeros(3, 0.0);
    const EncoderTrace zero_seeded = encode_sequence(toks, p, zeros);
    for (std::size_t i = 0; i < plain.per_token.size(); ++i) {
        EXPECT_EQ(plain.per_token.data[i], zero_seeded.per_token.data[i]);
    }
}

TEST(GradCheck, QuadraticIsExact) {
    ParamSet p;
    p.add("theta", 2, 3);
    Rng rng(17);
    init_uniform(p, "theta", 1.0, rng);
    const Tensor2 target(2, 3, 0.25);
    auto loss = [&]() {
        double l = 0.0;
        const Tensor2& th = p.value("theta");
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double d = th.data[i] - target.data[i];
            l += d * d;
        }
        return l;
    };
    auto grad = [&]() {
        const Tensor2& th = p.value("theta");
        Tensor2& g = p.grad("theta");
        for (std::size_t i = 0; i < th.size(); ++i) {
            g.data[i] += 2.0 * (th.data[i] - target.data[i]);
        }
    };
    Rng pick(1);
    const GradCheckReport rep = grad_check(loss, grad, p, 1e-4, pick);
    EXPECT_LT(rep.max_rel_error, 1e-8);
    EXPECT_EQ(rep.checked, 6u);
}

TEST(GradCheck, DetectsCorruptedGradient) {
    ParamSet p;
    p.add("theta", 1, 4);
    Rng rng(23);
    init_uniform(p, "theta", 1.0, rng);
    auto loss = [&]() {
        double l = 0.0;
        for (double v : p.value("theta").data) l += v * v;
        return l;
    };
    auto grad = [&]() {
        const Tensor2& th = p.value("theta");
        Tensor2& g = p.grad("theta");
        std::size_t worst = 0;
        for (std::size_t i = 0; i < th.size(); ++i) {
            g.data[i] += 2.0 * th.data[i];
            if (std::abs(th.data[i]) > std::abs(th.data[worst])) worst = i;
        }
        g.data[worst] *= 2.0;  // deliberate corruption
    };
    Rng pick(2);
    const GradCheckReport rep = grad_check(loss, grad, p, 1e-4, pick);
    EXPECT_GT(rep.max_rel_error, 0.4);
    EXPECT_EQ(rep.worst_param, "theta");
}

TEST(GradCheck, EncoderWithHeadPasses) {
    ParamSet p = tiny_encoder(9, 4, 3, 31);
    p.add("head.w", 2, 6);
    p.add("head.b", 2, 1);
    Rng rng(32);
    init_uniform(p, "head.w", 0.4, rng);
    const std::vector<std::size_t> toks{1, 5, 2, 8, 3};
    const std::size_t label = 1;
    auto forward = [&]() {
        const EncoderTrace t = encode_sequence(toks, p);
        const Vec logits = affine(p.value("head.w"), t.pooled,
                                  std::span<const double>(p.value("head.b").data));
        return softmax_xent(logits, label).loss;
    };
    auto backward = [&]() {
        const EncoderTrace t = encode_sequence(toks, p);
        const Vec logits = affine(p.value("head.w"), t.pooled,
                                  std::span<const double>(p.value("head.b").data));
        const XentResult x = softmax_xent(logits, label);
        Vec d_pooled(t.pooled.size(), 0.0);
        affine_backward(p.value("head.w"), t.pooled, x.dlogits, p.grad("head.w"),
                        std::span<double>(p.grad("head.b").data), d_pooled);
        encode_backward(t, p, Tensor2(), d_pooled);
    };
    Rng pick(3);
    const GradCheckReport rep = grad_check(forward, backward, p, 1e-4, pick);
    EXPECT_LT(rep.max_rel_error, 1e-4) << "worst " << rep.worst_param << "[" << rep.worst_index << "]";
}

TEST(Checkpoint, RoundTripIsBitExact) {
    CheckpointData ck;
    ck.seed = 1234567890123ull;
    ck.config_json = "{\"game\":{\"s\":0.15}}";
    ck.num_classes = 3;
    ck.vocab_words = {"<mask>", "<unk>", "alpha", "beta"};
    Rng rng(77);
    ParamSet& gen = ck.players["generator"];
    gen.add("embed", 4, 3);
    gen.add("zhead.w", 1, 6);
    gen.adam_step = 42;
    init_uniform(gen, "embed", 0.7, rng);
    init_uniform(gen, "zhead.w", 0.7, rng);
    ParamSet& pred = ck.players["predictor"];
    pred.add("head.b", 3, 1);
    init_uniform(pred, "head.b", 0.7, rng);

    const std::string path =
        (std::filesystem::temp_directory_path() / "rgame_ckpt_roundtrip.bin").string();
    save_checkpoint(path, ck);
    const CheckpointData rt = load_checkpoint(path);

    EXPECT_EQ(rt.seed, ck.seed);
    EXPECT_EQ(rt.config_json, ck.config_json);
    EXPECT_EQ(rt.num_classes, ck.num_classes);
    EXPECT_EQ(rt.vocab_words, ck.vocab_words);
    ASSERT_EQ(rt.players.size(), 2u);
    EXPECT_EQ(rt.players.at("generator").adam_step, 42u);
    for (const auto& [pname, pset] : ck.players) {
        const ParamSet& other = rt.players.at(pname);
        ASSERT_EQ(other.values.size(), pset.values.size());
        for (const auto& [tname, t] : pset.values) {
            const Tensor2& o = other.values.at(tname);
            ASSERT_TRUE(t.same_shape(o));
            for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t.data[i], o.data[i]);
        }
    }
    std::filesystem::remove(path);
}

TEST(Checkpoint, MissingFileThrows) {
    EXPECT_THROW(load_checkpoint("/nonexistent/rgame.bin"), std::runtime_error);
}

TEST(Checkpoint, GarbageFileThrows) {
    const std::string path = (std::filesystem::temp_directory_path() / "rgame_garbage.bin").string();
    {
        std::ofstream os(path, std::ios::binary);
        os << "this is not a checkpoint at all";
    }
    EXPECT_THROW(load_checkpoint(path), ParseError);
    std::filesystem::remove(path);
}
