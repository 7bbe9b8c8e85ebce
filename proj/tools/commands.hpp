#pragma once

#include <CLI11.hpp>

namespace crossgan::cli {

void add_ingest(CLI::App& app);
void add_synth(CLI::App& app);
void add_train(CLI::App& app);
void add_generate(CLI::App& app);
void add_grid(CLI::App& app);
void add_paired(CLI::App& app);
void add_knn_panel(CLI::App& app);
void add_retrieve(CLI::App& app);
void add_losses(CLI::App& app);

}  // namespace crossgan::cli
