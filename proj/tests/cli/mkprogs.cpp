// Writes the test programs as raw binaries plus sample campaign configs.
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support/programs.hpp"

namespace {

void put(const std::filesystem::path& p, const progs::Bytes& b) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void text(const std::filesystem::path& p, const char* s) { std::ofstream(p) << s; }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: mkprogs DIR\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  put(dir / "campaign.bin", progs::campaign_program());
  put(dir / "hello.bin", progs::hello_uart());
  put(dir / "factorial.bin", progs::factorial(6));
  put(dir / "forever.bin", progs::alu_forever());
  put(dir / "echo.bin", progs::uart_echo(3));
  put(dir / "bad.bin", {0xFF, 0xFF, 0xFF, 0xFF});
  text(dir / "echo.stim", "10 uart_rx 65\n20 uart_rx 66\n30 uart_rx 67\n");
  text(dir / "sweep.json", R"({
  "schema": "strv-campaign/1", "program": "campaign.bin", "records": "anomalies",
  "experiments": [{"kind": "sweep", "name": "pc", "cells": ["core.pc", "core.x9"], "phase": "edge", "stride": 5}]
})");
  text(dir / "double.json", R"({
  "schema": "strv-campaign/1", "program": "campaign.bin",
  "experiments": [{"kind": "targeted", "faults": [{"cycle": 10, "cell": "core.x9", "replica": 1, "count": 2}]}]
})");
  text(dir / "random.json", R"({
  "schema": "strv-campaign/1", "program": "campaign.bin", "seed": 99, "run_cycles": 400,
  "experiments": [{"kind": "random", "domain": "sram", "runs": 50, "cycles": [0, 50]},
                  {"kind": "poisson", "rate": {"core": 0.01, "peripherals": 0.01}, "runs": 20, "phase": "any"}]
})");
  text(dir / "scruboff.json", R"({
  "schema": "strv-campaign/1", "program": "campaign.bin", "seed": 5, "system": {"scrub": false},
  "experiments": [{"kind": "random", "domain": "sram", "runs": 20}]
})");
  text(dir / "broken.json", R"({
  "schema": "strv-campaign/1", "program": "missing.bin", "seeed": 1,
  "experiments": [{"kind": "random", "domain": "core", "runs": -1}]
})");
  return 0;
}
