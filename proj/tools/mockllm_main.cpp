/* Copyright 2026 The mcqpipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <chrono>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "mcqpipe/mockllm.hpp"

// Stands in for both the generator and the student service so the pipeline
// can be exercised end to end without network access or credentials. Point
// generator.base_url and student.base_url at the printed address.
int main(int argc, char** argv) {
  CLI::App app{
      "Deterministic scripted chat-completions server for offline pipeline "
      "runs"};
  int port = 0;
  app.add_option("--port", port, "Port to bind on 127.0.0.1 (0 picks one)")
      ->check(CLI::Range(0, 65535));
  CLI11_PARSE(app, argc, argv);

  try {
    mcqpipe::MockService service(port);
    std::cout << "listening on " << service.base_url() << std::endl;
    while (true) {
      std::this_thread::sleep_for(std::chrono::seconds(3600));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
