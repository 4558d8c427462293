from flask import Flask
from config import Config


def create_app(config_class=Config):
    app = Flask(__name__)
    app.config.from_object(config_class)
    app.config['EXPERIMENT_DEFAULTS'] = {
        'output_dir': app.config['OUTPUT_DIR'],
        'jobs': app.config['JOBS'],
        'seed': app.config['SEED'],
        'max_enum_dim': app.config['MAX_ENUM_DIM'],
    }

    # Library modules log under "fairbandits.*" and propagate to app.logger
    app.logger.setLevel(app.config['LOG_LEVEL'])

    # Register command blueprints
    from fairbandits.commands.simulate import bp as simulate_bp

    app.register_blueprint(simulate_bp)

    from fairbandits.commands.sweep import bp as sweep_bp

    app.register_blueprint(sweep_bp)

    from fairbandits.commands.audit import bp as audit_bp

    app.register_blueprint(audit_bp)

    from fairbandits.commands.kwik_bound import bp as kwik_bound_bp

    app.register_blueprint(kwik_bound_bp)

    return app
