#include "cli_app.hpp"

int main(int argc, char** argv) { return mcdr::cli::run(argc, argv); }
