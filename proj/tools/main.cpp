#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "crossgan/error.hpp"
#include "crossgan/runtime.hpp"

int main(int argc, char** argv) {
  CLI::App app{"crossgan: cross-domain GAN training, sampling and retrieval"};
  app.require_subcommand(1);
  crossgan::cli::add_ingest(app);
  crossgan::cli::add_synth(app);
  crossgan::cli::add_train(app);
  crossgan::cli::add_generate(app);
  crossgan::cli::add_grid(app);
  crossgan::cli::add_paired(app);
  crossgan::cli::add_knn_panel(app);
  crossgan::cli::add_retrieve(app);
  crossgan::cli::add_losses(app);

  try {
    crossgan::configure_from_environment();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const crossgan::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
