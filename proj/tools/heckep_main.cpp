// CLI entry point; subcommands are assembled in survey.hpp / cli.hpp.
#include "heckep/cli.hpp"

int main(int argc, char** argv) { return heckep::cli_main(argc, argv); }
