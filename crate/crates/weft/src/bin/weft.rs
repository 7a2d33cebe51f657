use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weft::app::standard_chain;
use weft::server::{serve, ServerConfig, Service};
use weft::template::process_file_plain;
use weft::{config, PropertyMap};

#[derive(Parser)]
#[command(name = "weft", version, about = "Line-oriented [[token]] template engine and web service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a template file to standard output.
    Render(RenderArgs),
    /// Serve a site over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RenderArgs {
    /// Template file to process.
    template: PathBuf,

    /// Config files parsed into CONFIG., in order.
    #[arg(long = "config", value_name = "FILE")]
    config: Vec<PathBuf>,

    /// Temporary variables, each bound as VAR.<k>.
    #[arg(long = "var", value_name = "K=V", value_parser = parse_key_value)]
    vars: Vec<(String, String)>,
}

#[derive(Args)]
struct ServeArgs {
    /// Site root directory (must contain template/).
    #[arg(long, env = "WEFT_ROOT")]
    root: PathBuf,

    /// Port to listen on.
    #[arg(long, default_value_t = 8080, env = "WEFT_PORT")]
    port: u16,

    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,

    /// Config files parsed on each request, in order (platform file first,
    /// then the global file). Relative paths resolve against the root.
    #[arg(long = "config", value_name = "FILE")]
    config: Vec<PathBuf>,

    /// Validation messages, parsed under ERROR.
    #[arg(long = "error-config", value_name = "FILE")]
    error_config: Option<PathBuf>,

    /// Spool file for outgoing feedback mail.
    #[arg(long, value_name = "FILE")]
    spool: Option<PathBuf>,

    /// Parse config files once instead of per request.
    #[arg(long)]
    cache_config: bool,
}

fn parse_key_value(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("{raw:?} is not of the form K=V"))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render(args) => render(args),
        Command::Serve(args) => run_server(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("weft: {err}");
            ExitCode::FAILURE
        }
    }
}

fn render(args: RenderArgs) -> weft::Result<()> {
    let mut props = PropertyMap::new();
    for file in &args.config {
        config::parse(file, &mut props)?;
    }
    for (key, value) in &args.vars {
        props.set(&format!("VAR.{key}"), value.clone())?;
    }
    let output = process_file_plain(&args.template, &standard_chain(), &mut props)?;
    print!("{output}");
    Ok(())
}

fn run_server(args: ServeArgs) -> weft::Result<()> {
    let mut cfg = ServerConfig::for_root(&args.root);
    cfg.bind_addr = args.bind;
    cfg.port = args.port;
    cfg.cache_config = args.cache_config;
    if !args.config.is_empty() {
        cfg.config_paths = args.config;
    }
    if let Some(error_config) = args.error_config {
        cfg.error_config = error_config;
    }
    if let Some(spool) = args.spool {
        cfg.spool_path = spool;
    }

    let handle = serve(Service::with_spool(cfg))?;
    eprintln!("weft: serving on http://{}/main", handle.local_addr());
    handle.join();
    Ok(())
}
