#pragma once

namespace pedemu::cli
{
    /// Entry point of the pedemu tool; returns the process exit code.
    int main(int argc, char **argv);
} // namespace pedemu::cli
