#include "crowdnoise/cli/commands.hpp"

int main(int argc, char** argv) { return crowdnoise::cli::run_cli(argc, argv); }
