#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmcast/crypto/x25519.hpp"
#include "swarmcast/sim/metrics.hpp"
#include "swarmcast/sim/scenario.hpp"
#include "swarmcast/sim/simulator.hpp"
#include "swarmcast/wire_codec.hpp"

namespace {

using namespace swarmcast;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInternal = 2;

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> from_hex(const std::string& text) {
  if (text.size() % 2 != 0) {
    return std::nullopt;
  }
  const auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    const int hi = nibble(text[i]);
    const int lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) {
      return std::nullopt;
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

int run_command(const std::string& scenario_path, const std::string& out_path,
                std::optional<std::uint64_t> seed_override,
                const std::string& trace_path) {
  sim::Scenario scenario = sim::load_scenario(scenario_path);
  if (seed_override) {
    scenario.seed = *seed_override;
  }

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!trace_path.empty()) {
    trace_file.open(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace_file) {
      std::cerr << "error: cannot write trace file \"" << trace_path << "\"\n";
      return kExitValidation;
    }
    trace = &trace_file;
  }

  sim::Simulator simulator{scenario};
  const sim::MetricsReport report = simulator.run(trace);

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write report file \"" << out_path << "\"\n";
    return kExitValidation;
  }
  out << sim::to_json_string(report);
  out.close();

  std::cout << sim::one_line_summary(report) << "\n";
  return kExitOk;
}

int compare_command(const std::string& scenario_path) {
  const sim::Scenario base = sim::load_scenario(scenario_path);

  std::printf("%-18s %14s %12s %16s %16s\n", "mode", "delivery_ratio",
              "tx_per_msg", "p95_latency_ms", "key_exchange_ms");
  for (const ForwardingMode mode :
       {ForwardingMode::NaiveFlood, ForwardingMode::PerSourceTrees,
        ForwardingMode::SpanningTree}) {
    sim::Scenario scenario = base;
    scenario.mode = mode;
    sim::Simulator simulator{scenario};
    const sim::MetricsReport r = simulator.run();
    std::printf("%-18s %14.3f %12.2f %16.1f %16llu\n", to_string(mode),
                r.delivery_ratio, r.transmissions_per_originated_message,
                r.latency.p95_ms,
                static_cast<unsigned long long>(r.key_exchange_time_ms));
  }
  return kExitOk;
}

int keygen_command(const std::string& seed_hex) {
  const auto bytes = from_hex(seed_hex);
  if (!bytes || bytes->empty() || bytes->size() > 32) {
    std::cerr << "error: --seed must be 2..64 hex characters (even count)\n";
    return kExitValidation;
  }
  // Right-align the seed bytes into the 32-byte scalar seed.
  crypto::Key256 seed{};
  std::copy(bytes->begin(), bytes->end(),
            seed.begin() + (seed.size() - bytes->size()));
  const crypto::KeyPair pair = crypto::generate_keypair(seed);
  std::cout << "private_key: " << to_hex(pair.private_key) << "\n";
  std::cout << "public_key:  " << to_hex(pair.public_key) << "\n";
  return kExitOk;
}

void print_message(const SealedMessage& msg, std::size_t index) {
  std::printf("  [%zu] origin=%u seq=%u timestamp_ms=%llu ttl=%u ct_len=%zu\n",
              index, msg.origin, msg.origin_seq,
              static_cast<unsigned long long>(msg.timestamp_ms), msg.ttl,
              msg.ciphertext.size());
  std::printf("      ciphertext=%s\n", to_hex(msg.ciphertext).c_str());
  std::printf("      tag=%s\n", to_hex(msg.tag).c_str());
}

int inspect_command(const std::string& frame_hex) {
  const auto bytes = from_hex(frame_hex);
  if (!bytes) {
    std::cerr << "error: frame is not valid hex\n";
    return kExitValidation;
  }
  const DecodeResult decoded = decode_frame(*bytes);
  if (!decoded.ok()) {
    std::cerr << "error: " << to_string(decoded.error) << " at offset "
              << decoded.offset << "\n";
    return kExitValidation;
  }
  const Frame& frame = *decoded.frame;

  const char* type_name = "?";
  switch (frame.frame_type) {
    case FrameType::Data:
      type_name = "data";
      break;
    case FrameType::Ogm:
      type_name = "ogm";
      break;
    case FrameType::Keyx:
      type_name = "keyx";
      break;
  }
  std::printf("version: %u\n", frame.version);
  std::printf("frame_type: %s\n", type_name);
  std::printf("sender: %u\n", frame.sender);
  std::printf("frame_seq: %u\n", frame.frame_seq);
  std::printf("next_hop_table: %zu entries\n", frame.next_hop_table.size());
  for (std::size_t i = 0; i < frame.next_hop_table.size(); ++i) {
    const NextHopEntry& e = frame.next_hop_table[i];
    std::printf("  [%zu] destination=%u next_hop=%u hop_count=%u\n", i,
                e.destination, e.next_hop, e.hop_count);
  }
  switch (frame.frame_type) {
    case FrameType::Data:
      std::printf("messages: %zu\n", frame.messages.size());
      for (std::size_t i = 0; i < frame.messages.size(); ++i) {
        print_message(frame.messages[i], i);
      }
      break;
    case FrameType::Ogm:
      std::printf("ogm: originator=%u ogm_seq=%u metric=%u\n",
                  frame.ogm->originator, frame.ogm->ogm_seq, frame.ogm->metric);
      break;
    case FrameType::Keyx:
      if (frame.keyx->phase == KeyxPhase::Pubkey) {
        std::printf("keyx: phase=pubkey\n");
        std::printf("  point=%s\n", to_hex(frame.keyx->pubkey).c_str());
      } else {
        std::printf("keyx: phase=wrapped member=%u\n", frame.keyx->member);
        std::printf("  wrapped=%s\n", to_hex(frame.keyx->wrapped).c_str());
        std::printf("  wrap_tag=%s\n", to_hex(frame.keyx->wrap_tag).c_str());
      }
      break;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure multi-hop telemetry broadcast simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string trace_path;
  std::optional<std::uint64_t> seed_override;
  std::string seed_hex;
  std::string frame_hex;

  CLI::App* run = app.add_subcommand("run", "Run one scenario file");
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_path, "Report output path")->required();
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_value, "Override the scenario seed");
  run->add_option("--trace", trace_path, "Write a per-event trace here");

  CLI::App* compare =
      app.add_subcommand("compare", "Run all three modes on one scenario");
  compare->add_option("--scenario", scenario_path, "Scenario file")->required();

  CLI::App* keygen = app.add_subcommand("keygen", "Derive a keypair from a seed");
  keygen->add_option("--seed", seed_hex, "Seed, hex")->required();

  CLI::App* inspect = app.add_subcommand("inspect", "Decode one frame from hex");
  inspect->add_option("frame", frame_hex, "Frame bytes, hex")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) {
      if (seed_opt->count() > 0) {
        seed_override = seed_value;
      }
      return run_command(scenario_path, out_path, seed_override, trace_path);
    }
    if (*compare) {
      return compare_command(scenario_path);
    }
    if (*keygen) {
      return keygen_command(seed_hex);
    }
    if (*inspect) {
      return inspect_command(frame_hex);
    }
  } catch (const sim::InvalidScenario& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
