"""Validate an explorer export against the published JSON schema."""
import json
import sys

import jsonschema


def main() -> int:
    schema_path, doc_path = sys.argv[1:3]
    with open(schema_path) as f:
        schema = json.load(f)
    with open(doc_path) as f:
        doc = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    ids = {n["id"] for n in doc["nodes"]}
    for e in doc["edges"]:
        if e["source"] not in ids or e["target"] not in ids:
            print(f"edge {e['source']}-{e['target']} references an unknown node")
            return 1
    print(f"valid: {len(doc['nodes'])} nodes, {len(doc['edges'])} edges")
    return 0


if __name__ == "__main__":
    sys.exit(main())
