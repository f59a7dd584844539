#include <benchmark/benchmark.h>

#include "imdsec/crypto/suite.hpp"
#include "imdsec/netsim/scenario.hpp"
#include "imdsec/puzzle.hpp"

using namespace imdsec;
using namespace imdsec::netsim;

static void BM_aead_seal_open(benchmark::State& state) {
    Rng rng(1);
    SymmetricKey k;
    rng.fill(k.raw.data(), k.raw.size());
    Bytes pt(static_cast<std::size_t>(state.range(0)), 0x5A);
    for (auto _ : state) {
        auto sealed = crypto::aead_encrypt(k, BytesView(pt.data(), pt.size()), BytesView{}, rng);
        auto open = crypto::aead_decrypt(k, BytesView(sealed.data(), sealed.size()), BytesView{});
        benchmark::DoNotOptimize(open);
    }
    state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_aead_seal_open)->Arg(16)->Arg(256)->Arg(4096);

static void BM_ecdsa_sign(benchmark::State& state) {
    Rng rng(2);
    auto seed = rng.bytes(32);
    auto kp = crypto::p192::keypair_from_seed(BytesView(seed.data(), seed.size()));
    auto msg = to_bytes("WriteTherapy 42 : nR nC");
    for (auto _ : state) {
        auto sig = crypto::p192::sign(kp.priv, BytesView(msg.data(), msg.size()));
        benchmark::DoNotOptimize(sig);
    }
}
BENCHMARK(BM_ecdsa_sign);

static void BM_ecdsa_verify(benchmark::State& state) {
    Rng rng(3);
    auto seed = rng.bytes(32);
    auto kp = crypto::p192::keypair_from_seed(BytesView(seed.data(), seed.size()));
    auto msg = to_bytes("WriteTherapy 42 : nR nC");
    auto sig = crypto::p192::sign(kp.priv, BytesView(msg.data(), msg.size()));
    for (auto _ : state) {
        benchmark::DoNotOptimize(crypto::p192::verify(kp.pub, BytesView(msg.data(), msg.size()), sig));
    }
}
BENCHMARK(BM_ecdsa_verify);

static void BM_puzzle_solve(benchmark::State& state) {
    Rng rng(4);
    SymmetricKey secret;
    rng.fill(secret.raw.data(), secret.raw.size());
    std::uint64_t t = 0;
    for (auto _ : state) {
        auto challenge = puzzle::issue(EntityId::from_u64(t), t, secret,
                                       static_cast<std::uint8_t>(state.range(0)));
        auto solved = puzzle::solve(challenge);
        benchmark::DoNotOptimize(solved);
        ++t;
    }
}
BENCHMARK(BM_puzzle_solve)->Arg(4)->Arg(8)->Arg(12);

static void BM_online_session(benchmark::State& state) {
    std::uint64_t seed = 1;
    for (auto _ : state) {
        TestbedConfig cfg;
        cfg.seed = seed++;
        auto tb = make_testbed(cfg);
        entities::RunPlan plan;
        plan.commands = {Command{CommandKind::WriteTherapy, 5}};
        tb.world->start_session(tb.readerId, plan);
        tb.world->run_until_quiescent();
        benchmark::DoNotOptimize(tb.reader->outcome().succeeded());
    }
}
BENCHMARK(BM_online_session)->Unit(benchmark::kMillisecond);

static void BM_scenario_matrix(benchmark::State& state) {
    std::uint64_t seed = 1;
    for (auto _ : state) {
        for (int n = 1; n <= 7; ++n) {
            auto result = run_scenario(standard_scenario(n), seed);
            benchmark::DoNotOptimize(result.asExpected);
        }
        ++seed;
    }
}
BENCHMARK(BM_scenario_matrix)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
