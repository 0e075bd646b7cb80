#pragma once

#include <string>
#include <utility>

#include "apifuzz/api_model.hpp"
#include "apifuzz/schema_loader.hpp"

namespace apifuzz::test_support {

/// Loads a single-document graph straight from text, no filesystem involved.
inline SchemaGraph load_graph(const std::string& text) {
  Fetcher f = [&](SchemaSource::Protocol, const std::string&) -> FetchOutcome {
    return {true, text, ""};
  };
  auto [graph, warnings] = load_schema({"/tmp/model.yaml", SchemaSource::Protocol::File}, {f});
  return std::move(graph);
}

/// Two-endpoint API whose create response declares a link onto the getter:
/// path.name and code come from the response body, query.name is constant.
inline const char* kLinksSchema = R"(
openapi: 3.0.0
info: {title: links-demo}
paths:
  "/api/links/create":
    post:
      tags:
      - bb-links-application
      operationId: postCreate
      responses:
        '200':
          description: OK
          content:
            "*/*":
              schema:
                "$ref": "#/components/schemas/BBLinksDto"
          links:
            LinkToGetUser:
              operationId: getUser
              parameters:
                path.name: "$response.body#/data/id"
                query.name: BAR
                code: "$response.body#/data/code"
  "/api/links/users/{name}/{code}":
    get:
      tags:
      - bb-links-application
      operationId: getUser
      parameters:
      - name: name
        in: path
        required: true
        schema:
          type: string
      - name: name
        in: query
        required: false
        schema:
          type: string
      - name: code
        in: path
        required: true
        schema:
          type: integer
          format: int32
      responses:
        '200': {description: OK}
components:
  schemas:
    BBLinksDto:
      type: object
      properties:
        data:
          type: object
          properties:
            id: {type: string}
            code: {type: integer}
        errrors: {type: string}
)";

}  // namespace apifuzz::test_support
