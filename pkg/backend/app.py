from flask import Flask, jsonify, request
from flask_cors import CORS

from backend import commands, config
from backend.modforms.errors import ComputationError

app = Flask(__name__)
CORS(app)


@app.route("/api/commands", methods=["GET"])
def api_commands():
    print("/api/commands served from the registry in commands.py")
    return jsonify({"ok": True, "commands": commands.list_commands(), "prec": config.PREC})


@app.route("/api/<name>", methods=["POST"])
def api_command(name: str):
    payload = request.get_json(silent=True)
    if payload is None:
        payload = {}
    if not isinstance(payload, dict):
        return jsonify({"ok": False, "error": "Request body must be a JSON object"}), 400
    try:
        result = commands.dispatch(name, payload)
    except commands.UsageError as exc:
        status = 404 if name not in commands.COMMANDS else 400
        return jsonify({"ok": False, "error": str(exc)}), status
    except ComputationError as exc:
        return jsonify({"ok": False, "error": str(exc), "kind": type(exc).__name__}), 422
    except ValueError as exc:
        return jsonify({"ok": False, "error": str(exc)}), 400
    except OSError as exc:
        return jsonify({"ok": False, "error": f"Filesystem error: {exc}"}), 500
    response = {"ok": True, "command": name, "text": result.text}
    response["result"] = result.data
    return jsonify(response)


if __name__ == "__main__":
    print(f"▶ Starting modular forms API on http://{config.HOST}:{config.PORT}")
    app.run(host=config.HOST, port=config.PORT, debug=config.DEBUG)
